//! Qudit circuits, Haar sampling and the nearest-neighbour random circuit
//! model.
//!
//! Gate sites are 1-based: a gate at site `i` acts on qudits `i` and `i+1`
//! (0-based flat qudits `i-1`, `i`). On a single-qudit register the only
//! admissible gate is a `d x d` matrix at site 1; this exists so identity
//! circuits can be compiled for `n = 1`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Layout, C64};
use crate::rng::complex_normal;

/// Default ceiling on the number of amplitudes in a state vector.
pub const DEFAULT_STATE_CAP: usize = 1 << 24;

const UNITARITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuditRegister {
    pub n: usize,
    pub d: usize,
}

impl QuditRegister {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        Self::with_cap(n, d, DEFAULT_STATE_CAP)
    }

    pub fn with_cap(n: usize, d: usize, cap: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidDimension(
                "register needs n >= 1 qudits".into(),
            ));
        }
        if d < 2 {
            return Err(Error::InvalidDimension(format!(
                "local dimension d = {d} < 2"
            )));
        }
        let required = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if required > cap as u128 {
            return Err(Error::Resource {
                what: "computational register".into(),
                required,
                available: cap as u128,
            });
        }
        Ok(Self { n, d })
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&vec![self.d; self.n]).expect("register dimension validated at construction")
    }

    /// Computational basis state with the given digits.
    pub fn basis_state(&self, digits: &[usize]) -> Vec<C64> {
        linalg::basis_vector(self.dim(), self.layout().index(digits))
    }

    /// `|0...0>`.
    pub fn zero_state(&self) -> Vec<C64> {
        linalg::basis_vector(self.dim(), 0)
    }

    /// `|0...01>`: the last qudit flipped to 1.
    pub fn flipped_state(&self) -> Vec<C64> {
        linalg::basis_vector(self.dim(), 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub t: usize,
    pub site: usize,
    pub u: CMatrix,
}

impl Gate {
    /// 0-based qudits the gate acts on.
    pub fn qudits(&self, register: &QuditRegister) -> Vec<usize> {
        if register.n == 1 {
            vec![0]
        } else {
            vec![self.site - 1, self.site]
        }
    }

    fn validate(&self, register: &QuditRegister, expected_t: usize) -> Result<()> {
        if self.t != expected_t {
            return Err(Error::Validation(format!(
                "gate time index {} out of order (expected {expected_t})",
                self.t
            )));
        }
        let (max_site, local) = if register.n == 1 {
            (1, register.d)
        } else {
            (register.n - 1, register.d * register.d)
        };
        if self.site < 1 || self.site > max_site {
            return Err(Error::Validation(format!(
                "gate {} site {} outside 1..={max_site}",
                self.t, self.site
            )));
        }
        if self.u.nrows() != local || self.u.ncols() != local {
            return Err(Error::DimensionMismatch {
                expected: local,
                actual: self.u.nrows(),
            });
        }
        let defect = linalg::unitarity_defect(&self.u);
        if defect > UNITARITY_TOL * local as f64 {
            return Err(Error::Validation(format!(
                "gate {} is not unitary (defect {defect:e})",
                self.t
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub register: QuditRegister,
    pub gates: Vec<Gate>,
    pub seed: Option<u64>,
}

impl Circuit {
    pub fn new(register: QuditRegister, gates: Vec<Gate>, seed: Option<u64>) -> Result<Self> {
        let circuit = Self {
            register,
            gates,
            seed,
        };
        circuit.validate()?;
        Ok(circuit)
    }

    /// `T` identity gates, all at site 1.
    pub fn identity(register: QuditRegister, t_len: usize) -> Self {
        let local = if register.n == 1 {
            register.d
        } else {
            register.d * register.d
        };
        let gates = (1..=t_len)
            .map(|t| Gate {
                t,
                site: 1,
                u: CMatrix::identity(local, local),
            })
            .collect();
        Self {
            register,
            gates,
            seed: None,
        }
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.gates.iter().enumerate() {
            g.validate(&self.register, i + 1)?;
        }
        Ok(())
    }

    /// Full `d^n x d^n` unitary, built by pushing basis columns through the gates.
    pub fn unitary(&self) -> CMatrix {
        let dim = self.register.dim();
        let layout = self.register.layout();
        let mut out = CMatrix::zeros(dim, dim);
        let mut col = vec![linalg::ZERO; dim];
        for j in 0..dim {
            col.iter_mut().for_each(|x| *x = linalg::ZERO);
            col[j] = linalg::ONE;
            for g in &self.gates {
                linalg::apply_dense_local_inplace(
                    &layout,
                    &g.qudits(&self.register),
                    &g.u,
                    &mut col,
                );
            }
            out.set_column(j, &DVector::from_column_slice(&col));
        }
        out
    }
}

/// Haar-random unitary: Ginibre matrix, QR, then the phases of `diag(R)`
/// moved into `Q`.
pub fn haar_unitary<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<CMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "Haar unitary of dimension 0".into(),
        ));
    }
    let z = CMatrix::from_fn(dim, dim, |_, _| complex_normal(rng));
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 {
            rjj / rjj.norm()
        } else {
            linalg::ONE
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Ok(q)
}

/// `T` gates, each on a uniform site in `1..=n-1` with a Haar `U(d^2)` matrix.
pub fn sample_local_random_circuit<R: rand::Rng + ?Sized>(
    register: QuditRegister,
    t_len: usize,
    rng: &mut R,
) -> Result<Circuit> {
    if register.n < 2 {
        return Err(Error::NoValidSite(register.n));
    }
    if t_len < 1 {
        return Err(Error::InvalidParameter(
            "circuit length T must be >= 1".into(),
        ));
    }
    let local = register.d * register.d;
    let mut gates = Vec::with_capacity(t_len);
    for t in 1..=t_len {
        let site = rng.random_range(1..register.n);
        let u = haar_unitary(local, rng)?;
        gates.push(Gate { t, site, u });
    }
    Ok(Circuit {
        register,
        gates,
        seed: None,
    })
}

/// Seeded convenience wrapper recording the seed on the circuit.
pub fn sample_seeded_circuit(register: QuditRegister, t_len: usize, seed: u64) -> Result<Circuit> {
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut c = sample_local_random_circuit(register, t_len, &mut rng)?;
    c.seed = Some(seed);
    Ok(c)
}

pub fn apply_gate(register: &QuditRegister, gate: &Gate, state: &mut [C64]) {
    linalg::apply_dense_local_inplace(&register.layout(), &gate.qudits(register), &gate.u, state);
}

fn check_initial(circuit: &Circuit, initial: &[C64]) -> Result<()> {
    let dim = circuit.register.dim();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: initial.len(),
        });
    }
    let nrm = linalg::norm(initial);
    if (nrm - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("initial state has norm {nrm}")));
    }
    Ok(())
}

/// `psi_0 = initial`, `psi_t = U_t psi_{t-1}`; returns all `T+1` states.
pub fn evolve(circuit: &Circuit, initial: &[C64]) -> Result<Vec<Vec<C64>>> {
    check_initial(circuit, initial)?;
    let layout = circuit.register.layout();
    let mut out = Vec::with_capacity(circuit.len() + 1);
    let mut state = initial.to_vec();
    out.push(state.clone());
    for g in &circuit.gates {
        linalg::apply_dense_local_inplace(&layout, &g.qudits(&circuit.register), &g.u, &mut state);
        out.push(state.clone());
    }
    Ok(out)
}

/// Final state only.
pub fn run(circuit: &Circuit, initial: &[C64]) -> Result<Vec<C64>> {
    check_initial(circuit, initial)?;
    let layout = circuit.register.layout();
    let mut state = initial.to_vec();
    for g in &circuit.gates {
        linalg::apply_dense_local_inplace(&layout, &g.qudits(&circuit.register), &g.u, &mut state);
    }
    Ok(state)
}

#[derive(Serialize, Deserialize)]
struct GateJson {
    t: usize,
    site: usize,
    u_re: Vec<Vec<f64>>,
    u_im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CircuitJson {
    n: usize,
    d: usize,
    #[serde(rename = "T")]
    t_len: usize,
    seed: Option<u64>,
    gates: Vec<GateJson>,
}

pub(crate) fn matrix_to_parts(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect();
    let im = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
        .collect();
    (re, im)
}

pub(crate) fn matrix_from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<CMatrix> {
    let rows = re.len();
    if im.len() != rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            actual: im.len(),
        });
    }
    for row in re.iter().chain(im) {
        if row.len() != rows {
            return Err(Error::DimensionMismatch {
                expected: rows,
                actual: row.len(),
            });
        }
    }
    Ok(CMatrix::from_fn(rows, rows, |i, j| {
        C64::new(re[i][j], im[i][j])
    }))
}

impl Circuit {
    /// JSON encoding; doubles are written in shortest round-trip form.
    pub fn to_json(&self) -> Result<String> {
        let doc = CircuitJson {
            n: self.register.n,
            d: self.register.d,
            t_len: self.len(),
            seed: self.seed,
            gates: self
                .gates
                .iter()
                .map(|g| {
                    let (u_re, u_im) = matrix_to_parts(&g.u);
                    GateJson {
                        t: g.t,
                        site: g.site,
                        u_re,
                        u_im,
                    }
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircuitJson = serde_json::from_str(text)?;
        let register = QuditRegister::new(doc.n, doc.d)?;
        if doc.gates.len() != doc.t_len {
            return Err(Error::Validation(format!(
                "T = {} but {} gates supplied",
                doc.t_len,
                doc.gates.len()
            )));
        }
        let gates = doc
            .gates
            .iter()
            .map(|g| {
                Ok(Gate {
                    t: g.t,
                    site: g.site,
                    u: matrix_from_parts(&g.u_re, &g.u_im)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Circuit::new(register, gates, doc.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn haar_is_unitary_for_small_dims() {
        let mut rng = rng_from_seed(1);
        for dim in [1, 2, 4, 9] {
            let u = haar_unitary(dim, &mut rng).unwrap();
            assert!(linalg::unitarity_defect(&u) <= 1e-12);
        }
        let u1 = haar_unitary(1, &mut rng).unwrap();
        assert!((u1[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(matches!(
            haar_unitary(0, &mut rng),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn two_qudit_register_uses_site_one() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let c = sample_seeded_circuit(reg, 3, 7).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.gates.iter().all(|g| g.site == 1));
        assert_eq!(c, sample_seeded_circuit(reg, 3, 7).unwrap());
    }

    #[test]
    fn single_qudit_register_has_no_random_site() {
        let reg = QuditRegister::new(1, 2).unwrap();
        let mut rng = rng_from_seed(0);
        assert!(matches!(
            sample_local_random_circuit(reg, 4, &mut rng),
            Err(Error::NoValidSite(1))
        ));
        assert!(Circuit::identity(reg, 3).validate().is_ok());
    }

    #[test]
    fn swap_moves_excitation() {
        let reg = QuditRegister::new(2, 2).unwrap();
        let mut swap = CMatrix::zeros(4, 4);
        for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            swap[(i, j)] = linalg::ONE;
        }
        let c = Circuit::new(
            reg,
            vec![Gate {
                t: 1,
                site: 1,
                u: swap,
            }],
            None,
        )
        .unwrap();
        let traj = evolve(&c, &reg.basis_state(&[0, 1])).unwrap();
        assert_eq!(traj[1], reg.basis_state(&[1, 0]));
    }

    #[test]
    fn unitary_matches_evolution() {
        let reg = QuditRegister::new(3, 2).unwrap();
        let c = sample_seeded_circuit(reg, 6, 3).unwrap();
        let u = c.unitary();
        let init = reg.basis_state(&[1, 0, 1]);
        let out = run(&c, &init).unwrap();
        for i in 0..8 {
            assert!((u[(i, 5)] - out[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn bad_gate_rejected() {
        let reg = QuditRegister::new(3, 2).unwrap();
        let g = Gate {
            t: 1,
            site: 3,
            u: CMatrix::identity(4, 4),
        };
        assert!(Circuit::new(reg, vec![g], None).is_err());
        let g = Gate {
            t: 2,
            site: 1,
            u: CMatrix::identity(4, 4),
        };
        assert!(Circuit::new(reg, vec![g], None).is_err());
    }

    #[test]
    fn register_budget_enforced() {
        assert!(matches!(
            QuditRegister::with_cap(30, 2, 1 << 20),
            Err(Error::Resource { .. })
        ));
        assert!(QuditRegister::new(1, 1).is_err());
    }
}
