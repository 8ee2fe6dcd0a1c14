//! Maximal k-local matrix elements between two pure states.
//!
//! For a subset `A` of qudits, `<psi| h_A |phi> = Tr(h_A M_A)` with
//! `M_A = Tr_{not A} |phi><psi|`. Over Hermitian `h` with `||h|| <= 1`,
//! `max Re(e^{i theta} Tr(h M)) = || (e^{i theta} M + e^{-i theta} M^dagger) / 2 ||_1`,
//! so `max_h |<psi|h|phi>|` is the maximum of that trace norm over `theta`.
//! The angle is sampled on a uniform grid of `[0, pi)`, which gives a lower
//! bound converging from below as the grid refines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Layout, C64};
use crate::qcircuit::Circuit;

pub const DEFAULT_THETA_GRID: usize = 64;

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn check_state(v: &[C64], dim: usize) -> Result<()> {
    if v.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: v.len(),
        });
    }
    let nrm = linalg::norm(v);
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("state has norm {nrm}")));
    }
    Ok(())
}

fn rotated_trace_norm(m: &CMatrix, theta: f64) -> f64 {
    let ph = C64::from_polar(1.0, theta);
    let herm = (m * ph + m.adjoint() * ph.conj()) * C64::new(0.5, 0.0);
    linalg::hermitian_trace_norm(&herm)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverlapValue {
    pub value: f64,
    /// Maximizing subset.
    pub subset: Vec<usize>,
    pub theta: f64,
    pub grid: usize,
}

fn max_over(mats: &[(Vec<usize>, CMatrix)], grid: usize) -> OverlapValue {
    let mut best = OverlapValue {
        value: 0.0,
        subset: Vec::new(),
        theta: 0.0,
        grid,
    };
    for (a, m) in mats {
        for g in 0..grid {
            let theta = std::f64::consts::PI * g as f64 / grid as f64;
            let v = rotated_trace_norm(m, theta);
            if v > best.value || best.subset.is_empty() {
                best = OverlapValue {
                    value: v,
                    subset: a.clone(),
                    theta,
                    grid,
                };
            }
        }
    }
    best
}

fn check_k(n: usize, k: usize, grid: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "locality k = {k} must lie in 1..={n}"
        )));
    }
    if grid < 4 {
        return Err(Error::InvalidParameter(format!(
            "theta grid {grid} must be at least 4"
        )));
    }
    Ok(())
}

/// `max_A max_theta || Re_theta Tr_{not A} |phi><psi| ||_1` over `k`-subsets
/// of `n` qudits of dimension `d`.
pub fn local_cross_overlap_max(
    psi: &[C64],
    phi: &[C64],
    n: usize,
    d: usize,
    k: usize,
    grid: usize,
) -> Result<OverlapValue> {
    check_k(n, k, grid)?;
    let layout = Layout::new(&vec![d; n])?;
    check_state(psi, layout.total())?;
    check_state(phi, layout.total())?;
    let mats: Vec<_> = subsets(n, k)
        .into_iter()
        .map(|a| {
            let m = linalg::partial_trace_outer(&layout, &a, phi, psi);
            (a, m)
        })
        .collect();
    Ok(max_over(&mats, grid))
}

/// Difference functional `<psi_a|h|psi_b> - <phi_a|h|phi_b>` maximized over
/// `k`-local `h` with `||h|| <= 1`, halved so that two orthogonal
/// single-site states give 1.
pub fn difference_max(
    psi: (&[C64], &[C64]),
    phi: (&[C64], &[C64]),
    n: usize,
    d: usize,
    k: usize,
    grid: usize,
) -> Result<OverlapValue> {
    check_k(n, k, grid)?;
    let layout = Layout::new(&vec![d; n])?;
    for v in [psi.0, psi.1, phi.0, phi.1] {
        check_state(v, layout.total())?;
    }
    let mats: Vec<_> = subsets(n, k)
        .into_iter()
        .map(|a| {
            let m = linalg::partial_trace_outer(&layout, &a, psi.1, psi.0)
                - linalg::partial_trace_outer(&layout, &a, phi.1, phi.0);
            (a, m)
        })
        .collect();
    let mut best = max_over(&mats, grid);
    best.value *= 0.5;
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FhPoint {
    pub depth: usize,
    pub value: f64,
}

/// Runs `circuit` from `|0^n>` and `|0^{n-1}1>` and evaluates
/// [`difference_max`] on the diagonal pair `(psi_t, psi_t)` versus
/// `(phi_t, phi_t)` at every checkpoint depth `t <= T`.
pub fn fh_decay_profile(
    circuit: &Circuit,
    k: usize,
    checkpoints: &[usize],
    grid: usize,
) -> Result<Vec<FhPoint>> {
    let reg = circuit.register;
    if let Some(&bad) = checkpoints.iter().find(|&&t| t > circuit.len()) {
        return Err(Error::InvalidParameter(format!(
            "checkpoint {bad} exceeds circuit length {}",
            circuit.len()
        )));
    }
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    let layout = reg.layout();
    let mut psi = reg.zero_state();
    let mut phi = reg.flipped_state();
    let mut applied = 0;
    let mut out = Vec::with_capacity(sorted.len());
    for &t in &sorted {
        while applied < t {
            let g = &circuit.gates[applied];
            let q = g.qudits(&reg);
            linalg::apply_dense_local_inplace(&layout, &q, &g.u, &mut psi);
            linalg::apply_dense_local_inplace(&layout, &q, &g.u, &mut phi);
            applied += 1;
        }
        let v = difference_max((&psi, &psi), (&phi, &phi), reg.n, reg.d, k, grid)?;
        out.push(FhPoint {
            depth: t,
            value: v.value,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcircuit::{sample_seeded_circuit, QuditRegister};
    use crate::rng;

    #[test]
    fn subset_enumeration() {
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(subsets(3, 1), vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn identical_states_give_one() {
        let mut r = rng::rng_from_seed(1);
        let psi = rng::haar_state(8, &mut r);
        let v = local_cross_overlap_max(&psi, &psi, 3, 2, 1, 16).unwrap();
        assert!((v.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn symmetric_and_phase_invariant() {
        let mut r = rng::rng_from_seed(2);
        let psi = rng::haar_state(16, &mut r);
        let phi = rng::haar_state(16, &mut r);
        let a = local_cross_overlap_max(&psi, &phi, 4, 2, 2, 32)
            .unwrap()
            .value;
        let b = local_cross_overlap_max(&phi, &psi, 4, 2, 2, 32)
            .unwrap()
            .value;
        let ph = C64::from_polar(1.0, 0.7);
        let rot: Vec<C64> = phi.iter().map(|x| x * ph).collect();
        let c = local_cross_overlap_max(&psi, &rot, 4, 2, 2, 32)
            .unwrap()
            .value;
        assert!((a - b).abs() < 1e-10);
        // A global phase shifts the optimal angle; on a grid the value moves
        // by at most the grid resolution.
        assert!((a - c).abs() < a * std::f64::consts::PI / 32.0);
    }

    #[test]
    fn depth_zero_is_one_and_identity_is_constant() {
        let reg = QuditRegister::new(3, 2).unwrap();
        let id = Circuit::identity(reg, 5);
        let prof = fh_decay_profile(&id, 1, &[0, 2, 5], 8).unwrap();
        for p in prof {
            assert!((p.value - 1.0).abs() < 1e-12);
        }
        let c = sample_seeded_circuit(reg, 5, 3).unwrap();
        assert!((fh_decay_profile(&c, 1, &[0], 8).unwrap()[0].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unseen_difference_is_zero() {
        // |000> vs |001>: windows missing qudit 2 see nothing, {2} sees |1><0|.
        let reg = QuditRegister::new(3, 2).unwrap();
        let layout = Layout::new(&[2, 2, 2]).unwrap();
        let psi = reg.zero_state();
        let phi = reg.flipped_state();
        let m = linalg::partial_trace_outer(&layout, &[0], &phi, &psi);
        assert!(linalg::trace_norm(&m) < 1e-15);
        let full = local_cross_overlap_max(&psi, &phi, 3, 2, 1, 8).unwrap();
        assert!((full.value - 1.0).abs() < 1e-12);
        assert_eq!(full.subset, vec![2]);
    }
}
