//! Monte-Carlo frame potentials `E |Tr(U^dagger V)|^{2s}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::qcircuit::{self, QuditRegister};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    Haar,
    LocalRandomCircuit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignEnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub d: usize,
    /// Circuit depth; ignored for the Haar ensemble.
    pub depth: usize,
    /// Number of independent pairs `(U, V)`.
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FramePotential {
    pub s: u32,
    pub estimate: f64,
    pub stderr: f64,
    /// Exact Haar value for the ensemble dimension.
    pub haar_value: u64,
    pub samples: usize,
    pub dim: usize,
}

/// Permutations of `0..s` whose longest increasing subsequence is at most
/// `dim`; equals `E_Haar |Tr U|^{2s}` on `U(dim)`.
pub fn haar_frame_potential(s: u32, dim: usize) -> u64 {
    fn lis(p: &[usize]) -> usize {
        let mut tails: Vec<usize> = Vec::new();
        for &x in p {
            match tails.binary_search(&x) {
                Ok(_) => {}
                Err(i) if i == tails.len() => tails.push(x),
                Err(i) => tails[i] = x,
            }
        }
        tails.len()
    }
    fn rec(p: &mut Vec<usize>, used: &mut [bool], dim: usize, count: &mut u64) {
        if p.len() == used.len() {
            if lis(p) <= dim {
                *count += 1;
            }
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                p.push(x);
                rec(p, used, dim, count);
                p.pop();
                used[x] = false;
            }
        }
    }
    let mut count = 0;
    rec(
        &mut Vec::new(),
        &mut vec![false; s as usize],
        dim,
        &mut count,
    );
    count
}

fn sample(spec: &DesignEnsembleSpec, reg: QuditRegister, r: &mut rng::Rng) -> Result<CMatrix> {
    match spec.kind {
        EnsembleKind::Haar => qcircuit::haar_unitary(reg.dim(), r),
        EnsembleKind::LocalRandomCircuit => {
            Ok(qcircuit::sample_local_random_circuit(reg, spec.depth, r)?.unitary())
        }
    }
}

/// Estimates the order-`s` frame potential from `spec.samples` i.i.d.
/// pairs. Pair `i` draws from its own stream `(seed, "frame-potential", i)`.
pub fn frame_potential(spec: &DesignEnsembleSpec, s: u32) -> Result<FramePotential> {
    if !(1..=3).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "frame potential order s = {s} must be 1, 2 or 3"
        )));
    }
    if spec.samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 samples, got {}",
            spec.samples
        )));
    }
    let reg = QuditRegister::new(spec.n, spec.d)?;
    let values: Vec<f64> = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::cell_rng(spec.seed, "frame-potential", &[i as u64]);
            let u = sample(spec, reg, &mut r)?;
            let v = sample(spec, reg, &mut r)?;
            let tr = (u.adjoint() * v).trace();
            Ok(tr.norm_sqr().powi(s as i32))
        })
        .collect::<Result<_>>()?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(FramePotential {
        s,
        estimate: mean,
        stderr: (var / n).sqrt(),
        haar_value: haar_frame_potential(s, reg.dim()),
        samples: spec.samples,
        dim: reg.dim(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_reference_values() {
        assert_eq!(haar_frame_potential(1, 1), 1);
        assert_eq!(haar_frame_potential(2, 1), 1);
        assert_eq!(haar_frame_potential(2, 4), 2);
        assert_eq!(haar_frame_potential(3, 2), 5);
        assert_eq!(haar_frame_potential(3, 3), 6);
    }

    #[test]
    fn haar_ensemble_first_moment() {
        let spec = DesignEnsembleSpec {
            kind: EnsembleKind::Haar,
            n: 2,
            d: 2,
            depth: 0,
            samples: 400,
            seed: 7,
        };
        let fp = frame_potential(&spec, 1).unwrap();
        assert!((fp.estimate - 1.0).abs() <= 3.0 * fp.stderr + 1e-12);
        assert!(frame_potential(&spec, 4).is_err());
        assert!(frame_potential(&DesignEnsembleSpec { samples: 1, ..spec }, 1).is_err());
    }
}
