use serde::{Deserialize, Serialize};

use super::poset::{PosetJson, TimePoset};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Layout, C64, ZERO};
use crate::qcircuit::{self, Circuit, Gate};

/// How the computational state of a label off the chain is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum JunkUnitary {
    /// A fixed unitary on the whole register, independent of the circuit.
    Fixed(CMatrix),
    /// A short gate sequence (at most `q(n)` gates) applied to `psi_{t_p}`.
    Gates(Vec<Gate>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum JunkRule {
    /// Label lies on the chain; its state comes from the circuit.
    Chain,
    /// `psi_p = V_p psi_{t_p}`.
    Derived(JunkUnitary),
    /// Explicit state for a label with no chain element below it.
    Explicit(Vec<C64>),
}

impl JunkUnitary {
    pub fn apply(&self, circuit: &Circuit, state: &[C64]) -> Result<Vec<C64>> {
        match self {
            JunkUnitary::Fixed(v) => {
                if v.nrows() != state.len() || v.ncols() != state.len() {
                    return Err(Error::DimensionMismatch {
                        expected: state.len(),
                        actual: v.nrows(),
                    });
                }
                let x = nalgebra::DVector::from_column_slice(state);
                Ok((v * x).iter().copied().collect())
            }
            JunkUnitary::Gates(gates) => {
                let mut out = state.to_vec();
                for g in gates {
                    qcircuit::apply_gate(&circuit.register, g, &mut out);
                }
                Ok(out)
            }
        }
    }

    pub fn gate_count(&self) -> Option<usize> {
        match self {
            JunkUnitary::Fixed(_) => None,
            JunkUnitary::Gates(g) => Some(g.len()),
        }
    }
}

/// Clock encoding of poset labels by their rank `k` in a linear extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockLabeling {
    /// One qudit of dimension `|P|` in state `|k>`.
    Register,
    /// `|P| - 1` qubits in state `1^k 0^(|P|-1-k)`.
    Unary,
}

/// `sum_p alpha_p |p>|psi_p>` with product clock labels.
///
/// The vector layout is the clock qudits (`clock_dims`) followed by the
/// computational qudits (`comp_dims`).
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryState {
    pub poset: TimePoset,
    pub clock_dims: Vec<usize>,
    pub clock_labels: Vec<Vec<usize>>,
    pub amplitudes: Vec<C64>,
    pub comp_dims: Vec<usize>,
    pub comp_states: Vec<Vec<C64>>,
    pub junk: Vec<JunkRule>,
}

/// `psi_p` for every label: chain states from `evolve`, the rest from the
/// junk rules.
pub fn computational_states(
    circuit: &Circuit,
    initial: &[C64],
    poset: &TimePoset,
    junk: &[JunkRule],
) -> Result<Vec<Vec<C64>>> {
    if poset.t_len() != circuit.len() {
        return Err(Error::Validation(format!(
            "poset chain has T = {} but the circuit has {} gates",
            poset.t_len(),
            circuit.len()
        )));
    }
    if junk.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            actual: junk.len(),
        });
    }
    let traj = qcircuit::evolve(circuit, initial)?;
    let dim = circuit.register.dim();
    let mut out = Vec::with_capacity(poset.len());
    for (p, rule) in junk.iter().enumerate() {
        let state = match (poset.chain_time(p), poset.t_p(p), rule) {
            (Some(t), _, JunkRule::Chain) => traj[t].clone(),
            (Some(_), _, _) => {
                return Err(Error::Validation(format!(
                    "label {p} lies on the chain but has a junk rule"
                )))
            }
            (None, Some(t), JunkRule::Derived(v)) => v.apply(circuit, &traj[t])?,
            (None, Some(_), JunkRule::Explicit(_)) => {
                return Err(Error::Validation(format!(
                    "label {p} has a chain element below it, so its state must be V_p psi_(t_p)"
                )))
            }
            (None, None, JunkRule::Explicit(s)) => {
                if s.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        actual: s.len(),
                    });
                }
                s.clone()
            }
            (None, _, _) => {
                return Err(Error::IncompleteSpecification(format!(
                    "label {p} is off the chain with no usable state rule"
                )))
            }
        };
        out.push(state);
    }
    Ok(out)
}

fn labels_for(poset: &TimePoset, labeling: ClockLabeling) -> (Vec<usize>, Vec<Vec<usize>>) {
    let q = poset.len();
    let rank = poset.linear_extension_rank();
    match labeling {
        ClockLabeling::Register => (vec![q], rank.iter().map(|&k| vec![k]).collect()),
        ClockLabeling::Unary => (
            vec![2; q - 1],
            rank.iter()
                .map(|&k| (0..q - 1).map(|i| usize::from(i < k)).collect())
                .collect(),
        ),
    }
}

/// Standard history state of `circuit` started in `initial`.
pub fn standard_history_state(
    circuit: &Circuit,
    amplitudes: &[C64],
    initial: &[C64],
    poset: &TimePoset,
    junk: &[JunkRule],
    labeling: ClockLabeling,
) -> Result<HistoryState> {
    if amplitudes.len() != poset.len() {
        return Err(Error::DimensionMismatch {
            expected: poset.len(),
            actual: amplitudes.len(),
        });
    }
    let mass: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if (mass - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!(
            "amplitudes have squared norm {mass}"
        )));
    }
    let states = computational_states(circuit, initial, poset, junk)?;
    let (clock_dims, clock_labels) = labels_for(poset, labeling);
    Ok(HistoryState {
        poset: poset.clone(),
        clock_dims,
        clock_labels,
        amplitudes: amplitudes.to_vec(),
        comp_dims: vec![circuit.register.d; circuit.register.n],
        comp_states: states,
        junk: junk.to_vec(),
    })
}

/// Chain-only history state, as produced by the Feynman–Kitaev compiler.
pub fn chain_history_state(
    circuit: &Circuit,
    amplitudes: &[C64],
    initial: &[C64],
    labeling: ClockLabeling,
) -> Result<HistoryState> {
    let poset = TimePoset::chain_only(circuit.len());
    let junk = vec![JunkRule::Chain; poset.len()];
    standard_history_state(circuit, amplitudes, initial, &poset, &junk, labeling)
}

pub fn uniform_amplitudes(count: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (count as f64).sqrt(), 0.0); count]
}

impl HistoryState {
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut d = self.clock_dims.clone();
        d.extend(&self.comp_dims);
        d
    }

    pub fn comp_dim(&self) -> usize {
        self.comp_dims.iter().product()
    }

    pub fn mass(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Checks normalization, label distinctness and per-label state norms.
    pub fn validate(&self) -> Result<()> {
        let mass = self.mass();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "amplitude mass {mass} differs from 1"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for label in &self.clock_labels {
            if !seen.insert(label.clone()) {
                return Err(Error::Validation(format!("clock label {label:?} repeats")));
            }
        }
        for (p, s) in self.comp_states.iter().enumerate() {
            let nrm = linalg::norm(s);
            if (nrm - 1.0).abs() > 1e-10 {
                return Err(Error::Validation(format!(
                    "state of label {p} has norm {nrm}"
                )));
            }
        }
        Ok(())
    }

    fn clock_index(&self, layout: &Layout, p: usize) -> usize {
        self.clock_labels[p]
            .iter()
            .enumerate()
            .map(|(q, &x)| x * layout.stride(q))
            .sum()
    }

    /// Dense vector on the clock-then-computational layout.
    pub fn to_vector(&self) -> Result<Vec<C64>> {
        let layout = Layout::new(&self.dims())?;
        let c = self.comp_dim();
        let mut out = vec![ZERO; layout.total()];
        for p in 0..self.len() {
            let a = self.amplitudes[p];
            if a == ZERO {
                continue;
            }
            let base = self.clock_index(&layout, p);
            for x in 0..c {
                out[base + x] += a * self.comp_states[p][x];
            }
        }
        Ok(out)
    }

    /// `<self|other>` computed label by label. Both states must share the
    /// same clock labels.
    pub fn inner(&self, other: &HistoryState) -> Result<C64> {
        if self.clock_labels != other.clock_labels || self.clock_dims != other.clock_dims {
            return Err(Error::Validation(
                "history states use different clock labels".into(),
            ));
        }
        Ok((0..self.len())
            .map(|p| {
                self.amplitudes[p].conj()
                    * other.amplitudes[p]
                    * linalg::inner(&self.comp_states[p], &other.comp_states[p])
            })
            .sum())
    }

    /// Renormalized restriction to the labels with `keep[p]`.
    pub fn restricted(&self, keep: &[bool]) -> Result<(HistoryState, f64)> {
        let kept: f64 = (0..self.len())
            .filter(|&p| keep[p])
            .map(|p| self.amplitudes[p].norm_sqr())
            .sum();
        if kept <= 0.0 {
            return Err(Error::DegenerateTruncation { r: 0 });
        }
        let s = kept.sqrt();
        let mut out = self.clone();
        for p in 0..self.len() {
            out.amplitudes[p] = if keep[p] {
                self.amplitudes[p] / s
            } else {
                ZERO
            };
        }
        Ok((out, kept))
    }

    pub fn profile(&self) -> super::amplitudes::AmplitudeProfile<'_> {
        super::amplitudes::AmplitudeProfile {
            poset: &self.poset,
            amplitudes: &self.amplitudes,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = HistoryStateJson {
            poset: self.poset.to_json(),
            clock_dims: self.clock_dims.clone(),
            clock_labels: self.clock_labels.clone(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
            comp_dims: self.comp_dims.clone(),
            comp_states: self
                .comp_states
                .iter()
                .map(|s| s.iter().map(|a| [a.re, a.im]).collect())
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Restores the data of a serialized history state; junk rules are not
    /// serialized and come back as explicit states off the chain.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HistoryStateJson = serde_json::from_str(text)?;
        let poset = TimePoset::from_json(&doc.poset)?;
        let junk = (0..poset.len())
            .map(|p| match poset.chain_time(p) {
                Some(_) => JunkRule::Chain,
                None => JunkRule::Explicit(
                    doc.comp_states[p]
                        .iter()
                        .map(|a| C64::new(a[0], a[1]))
                        .collect(),
                ),
            })
            .collect();
        let hs = Self {
            poset,
            clock_dims: doc.clock_dims,
            clock_labels: doc.clock_labels,
            amplitudes: doc
                .amplitudes
                .iter()
                .map(|a| C64::new(a[0], a[1]))
                .collect(),
            comp_dims: doc.comp_dims,
            comp_states: doc
                .comp_states
                .iter()
                .map(|s| s.iter().map(|a| C64::new(a[0], a[1])).collect())
                .collect(),
            junk,
        };
        hs.validate()?;
        Ok(hs)
    }
}

#[derive(Serialize, Deserialize)]
struct HistoryStateJson {
    poset: PosetJson,
    clock_dims: Vec<usize>,
    clock_labels: Vec<Vec<usize>>,
    amplitudes: Vec<[f64; 2]>,
    comp_dims: Vec<usize>,
    comp_states: Vec<Vec<[f64; 2]>>,
}
