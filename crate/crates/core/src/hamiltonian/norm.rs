use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::LocalHamiltonian;
use crate::error::{Error, Result};

/// Per-qudit interaction strength.
///
/// `per_qudit[q]` is `sum_{Z containing q} w(Z) ||h_Z||` where `w = 1` for the
/// plain norm and `w = exp(|Z|^(1+eps))` for the quasi-local norm; `gamma`
/// is its maximum. `plain_per_qudit` always holds the unweighted sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationReport {
    pub gamma: f64,
    pub per_qudit: Vec<f64>,
    pub epsilon: Option<f64>,
    pub plain_per_qudit: Vec<f64>,
    pub term_norms: Vec<f64>,
}

fn term_norms(h: &LocalHamiltonian) -> Result<Vec<f64>> {
    h.check_hermitian()?;
    Ok(h.terms().par_iter().map(|t| t.operator_norm()).collect())
}

fn sums(h: &LocalHamiltonian, norms: &[f64], weight: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut acc = vec![0.0; h.m()];
    for (t, &nrm) in h.terms().iter().zip(norms) {
        let w = weight(t.k());
        for &q in t.support() {
            acc[q] += nrm * w;
        }
    }
    acc
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

pub fn gamma_norm(h: &LocalHamiltonian) -> Result<NormalizationReport> {
    let norms = term_norms(h)?;
    let plain = sums(h, &norms, |_| 1.0);
    Ok(NormalizationReport {
        gamma: max_of(&plain),
        per_qudit: plain.clone(),
        epsilon: None,
        plain_per_qudit: plain,
        term_norms: norms,
    })
}

pub fn quasi_local_norm(h: &LocalHamiltonian, epsilon: f64) -> Result<NormalizationReport> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "quasi-local exponent epsilon must be positive, got {epsilon}"
        )));
    }
    let norms = term_norms(h)?;
    let plain = sums(h, &norms, |_| 1.0);
    let weighted = sums(h, &norms, |k| (k as f64).powf(1.0 + epsilon).exp());
    Ok(NormalizationReport {
        gamma: max_of(&weighted),
        per_qudit: weighted,
        epsilon: Some(epsilon),
        plain_per_qudit: plain,
        term_norms: norms,
    })
}

impl NormalizationReport {
    /// CSV with header `qudit_index,sum,weighted_sum`; the last column is
    /// empty for an unweighted report.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["qudit_index", "sum", "weighted_sum"])?;
        for (q, plain) in self.plain_per_qudit.iter().enumerate() {
            let weighted = match self.epsilon {
                Some(_) => format!("{}", self.per_qudit[q]),
                None => String::new(),
            };
            w.write_record([q.to_string(), format!("{plain}"), weighted])?;
        }
        w.flush()?;
        Ok(())
    }
}
