//! Feynman–Kitaev compilation.
//!
//! Register clock: one qudit of dimension `T+1` holding `|t>`.
//! Unary clock: `T` qubits `c_1..c_T` with `|t> = 1^t 0^(T-t)`, plus
//! `|01><01|` on every adjacent pair to penalize invalid clock strings.
//! In both cases the clock qudits come first, followed by the `n`
//! computational qudits.

use serde::{Deserialize, Serialize};

use super::{LocalHamiltonian, LocalTerm, DEFAULT_ASSEMBLY_CAP};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ONE, ZERO};
use crate::qcircuit::Circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockKind {
    Register,
    Unary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rescale {
    None,
    ByT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompileOptions {
    pub clock: ClockKind,
    pub include_input_penalty: bool,
    /// `witness_mask[j] = true` exempts computational qudit `j` (0-based)
    /// from the input penalty. Empty means no witness qudits.
    pub witness_mask: Vec<bool>,
    pub rescale: Rescale,
    pub memory_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        Self {
            clock: ClockKind::Register,
            include_input_penalty: true,
            witness_mask: Vec::new(),
            rescale: Rescale::None,
            memory_cap: DEFAULT_ASSEMBLY_CAP,
        }
    }
}

impl CompileOptions {
    pub fn propagation_only() -> Self {
        Self {
            include_input_penalty: false,
            ..Self::default()
        }
    }
}

/// Compiled Hamiltonian together with the layout needed to embed history
/// states into its Hilbert space.
#[derive(Debug, Clone)]
pub struct FkHamiltonian {
    pub hamiltonian: LocalHamiltonian,
    pub clock: ClockKind,
    pub t_len: usize,
    pub n: usize,
    pub d: usize,
    pub clock_qudits: usize,
    /// Factor applied to every term (`1` or `1/T`).
    pub scale: f64,
    pub warnings: Vec<String>,
}

impl FkHamiltonian {
    pub fn comp_dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn clock_dim(&self) -> usize {
        match self.clock {
            ClockKind::Register => self.t_len + 1,
            ClockKind::Unary => 1 << self.t_len,
        }
    }

    pub fn total_dim(&self) -> usize {
        self.clock_dim() * self.comp_dim()
    }

    /// Flat clock-register index of the legal clock state `|t>`.
    pub fn clock_index(&self, t: usize) -> usize {
        match self.clock {
            ClockKind::Register => t,
            ClockKind::Unary => {
                let big_t = self.t_len;
                (0..t).map(|i| 1usize << (big_t - 1 - i)).sum()
            }
        }
    }

    /// Flat indices spanning the legal-clock sector.
    pub fn valid_sector(&self) -> Vec<usize> {
        let c = self.comp_dim();
        (0..=self.t_len)
            .flat_map(|t| {
                let base = self.clock_index(t) * c;
                (0..c).map(move |x| base + x)
            })
            .collect()
    }

    /// `sum_t amplitudes[t] |t> |states[t]>`.
    pub fn embed(&self, amplitudes: &[C64], states: &[Vec<C64>]) -> Result<Vec<C64>> {
        if amplitudes.len() != self.t_len + 1 || states.len() != self.t_len + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.t_len + 1,
                actual: amplitudes.len().min(states.len()),
            });
        }
        let c = self.comp_dim();
        let mut out = vec![ZERO; self.total_dim()];
        for (t, (a, s)) in amplitudes.iter().zip(states).enumerate() {
            if s.len() != c {
                return Err(Error::DimensionMismatch {
                    expected: c,
                    actual: s.len(),
                });
            }
            let base = self.clock_index(t) * c;
            for (x, v) in s.iter().enumerate() {
                out[base + x] += a * v;
            }
        }
        Ok(out)
    }
}

/// Appends `1/2 (|a><a| + |b><b|) tensor I - 1/2 (|a><b| tensor U + h.c.)`
/// where `a`, `b` are local clock patterns.
fn propagation_entries(after: usize, before: usize, u: &CMatrix) -> Vec<(usize, usize, C64)> {
    let g = u.nrows();
    let half = C64::new(0.5, 0.0);
    let mut e = Vec::with_capacity(2 * g + 2 * g * g);
    for x in 0..g {
        e.push((after * g + x, after * g + x, half));
        e.push((before * g + x, before * g + x, half));
    }
    for x in 0..g {
        for y in 0..g {
            let v = u[(x, y)];
            if v != ZERO {
                e.push((after * g + x, before * g + y, -half * v));
                e.push((before * g + y, after * g + x, -half * v.conj()));
            }
        }
    }
    e
}

pub fn compile_feynman_kitaev(
    circuit: &Circuit,
    options: &CompileOptions,
) -> Result<FkHamiltonian> {
    circuit.validate()?;
    let reg = circuit.register;
    let (n, d) = (reg.n, reg.d);
    let big_t = circuit.len();
    if big_t == 0 {
        return Err(Error::InvalidParameter(
            "circuit has no gates (T = 0)".into(),
        ));
    }
    if !options.witness_mask.is_empty() && options.witness_mask.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: options.witness_mask.len(),
        });
    }

    let (clock_dims, clock_qudits): (Vec<usize>, usize) = match options.clock {
        ClockKind::Register => (vec![big_t + 1], 1),
        ClockKind::Unary => (vec![2; big_t], big_t),
    };
    let required: u128 = clock_dims
        .iter()
        .map(|&x| x as u128)
        .try_fold(1u128, |acc, x| acc.checked_mul(x))
        .and_then(|c| c.checked_mul((d as u128).checked_pow(n as u32)?))
        .unwrap_or(u128::MAX);
    if required > options.memory_cap as u128 {
        return Err(Error::Resource {
            what: format!("{:?} clock Hamiltonian dimension", options.clock).to_lowercase(),
            required,
            available: options.memory_cap as u128,
        });
    }

    let mut dims = clock_dims.clone();
    dims.extend(std::iter::repeat_n(d, n));
    let mut terms = Vec::new();
    let mut warnings = Vec::new();

    for g in &circuit.gates {
        let t = g.t;
        let gate_qudits: Vec<usize> = g.qudits(&reg).iter().map(|q| q + clock_qudits).collect();
        let gate_dims = vec![d; gate_qudits.len()];
        let (clock_support, clock_local, after, before) = match options.clock {
            ClockKind::Register => (vec![0], vec![big_t + 1], t, t - 1),
            ClockKind::Unary => {
                if big_t == 1 {
                    (vec![0], vec![2], 1, 0)
                } else if t == 1 {
                    (vec![0, 1], vec![2, 2], 0b10, 0b00)
                } else if t == big_t {
                    (vec![big_t - 2, big_t - 1], vec![2, 2], 0b11, 0b10)
                } else {
                    (vec![t - 2, t - 1, t], vec![2, 2, 2], 0b110, 0b100)
                }
            }
        };
        let mut support = clock_support;
        support.extend(&gate_qudits);
        let mut local = clock_local;
        local.extend(&gate_dims);
        terms.push(LocalTerm::from_entries(
            support,
            local,
            propagation_entries(after, before, &g.u),
        )?);
    }

    if options.clock == ClockKind::Unary {
        for i in 0..big_t.saturating_sub(1) {
            terms.push(LocalTerm::from_entries(
                vec![i, i + 1],
                vec![2, 2],
                [(0b01, 0b01, ONE)],
            )?);
        }
    }

    if options.include_input_penalty {
        let penalized: Vec<usize> = (0..n)
            .filter(|&j| !options.witness_mask.get(j).copied().unwrap_or(false))
            .collect();
        if penalized.is_empty() {
            warnings
                .push("every computational qudit is a witness: no input constraint emitted".into());
        }
        let clock_local = clock_dims[0];
        for j in penalized {
            // |t = 0> on the clock: index 0 on the register, c_1 = 0 for unary.
            let entries = (1..d).map(|a| (a, a, ONE));
            terms.push(LocalTerm::from_entries(
                vec![0, clock_qudits + j],
                vec![clock_local, d],
                entries,
            )?);
        }
    }

    let scale = match options.rescale {
        Rescale::None => 1.0,
        Rescale::ByT => 1.0 / big_t as f64,
    };
    if scale != 1.0 {
        terms = terms.into_iter().map(|t| t.scaled(scale)).collect();
    }

    Ok(FkHamiltonian {
        hamiltonian: LocalHamiltonian::new(dims, terms)?,
        clock: options.clock,
        t_len: big_t,
        n,
        d,
        clock_qudits,
        scale,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{assemble, gamma_norm};
    use crate::linalg::hermitian_eigenvalues;
    use crate::qcircuit::{evolve, sample_seeded_circuit, QuditRegister};

    #[test]
    fn single_step_identity_spectrum() {
        let reg = QuditRegister::new(1, 2).unwrap();
        let fk = compile_feynman_kitaev(
            &Circuit::identity(reg, 1),
            &CompileOptions::propagation_only(),
        )
        .unwrap();
        let ev = hermitian_eigenvalues(&assemble(&fk.hamiltonian).unwrap().to_dense());
        let expect = [0.0, 0.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn register_gamma_counts_terms_on_clock() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = sample_seeded_circuit(reg, 5, 1).unwrap();
        let fk = compile_feynman_kitaev(&c, &CompileOptions::propagation_only()).unwrap();
        let r = gamma_norm(&fk.hamiltonian).unwrap();
        assert!((r.per_qudit[0] - 5.0).abs() < 1e-10);
        assert!((r.gamma - 5.0).abs() < 1e-10);
    }

    #[test]
    fn unary_and_register_share_valid_sector_spectrum() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = sample_seeded_circuit(reg, 4, 9).unwrap();
        let r = compile_feynman_kitaev(&c, &CompileOptions::default()).unwrap();
        let u = compile_feynman_kitaev(
            &c,
            &CompileOptions {
                clock: ClockKind::Unary,
                ..CompileOptions::default()
            },
        )
        .unwrap();
        let er = hermitian_eigenvalues(&assemble(&r.hamiltonian).unwrap().to_dense());
        let eu = hermitian_eigenvalues(&u.hamiltonian.sector_matrix(&u.valid_sector()).unwrap());
        for (a, b) in er.iter().zip(&eu) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn history_state_is_zero_energy_for_both_clocks() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = sample_seeded_circuit(reg, 3, 4).unwrap();
        let traj = evolve(&c, &reg.zero_state()).unwrap();
        let amp = vec![C64::new(0.5, 0.0); 4];
        for clock in [ClockKind::Register, ClockKind::Unary] {
            let fk = compile_feynman_kitaev(
                &c,
                &CompileOptions {
                    clock,
                    ..CompileOptions::default()
                },
            )
            .unwrap();
            let psi = fk.embed(&amp, &traj).unwrap();
            let hpsi = fk.hamiltonian.apply(&psi).unwrap();
            assert!(crate::linalg::norm(&hpsi) < 1e-12);
        }
    }

    #[test]
    fn unary_budget_is_enforced() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = Circuit::identity(reg, 40);
        let opts = CompileOptions {
            clock: ClockKind::Unary,
            ..CompileOptions::default()
        };
        assert!(matches!(
            compile_feynman_kitaev(&c, &opts),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn all_witness_warns() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = Circuit::identity(reg, 2);
        let opts = CompileOptions {
            witness_mask: vec![true, true],
            ..CompileOptions::default()
        };
        let fk = compile_feynman_kitaev(&c, &opts).unwrap();
        assert_eq!(fk.warnings.len(), 1);
    }
}
