use serde::Serialize;

use super::state::{computational_states, HistoryState};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::qcircuit::Circuit;

/// Truncated pair for a history state and a cut `r`.
#[derive(Debug, Clone)]
pub struct Truncation {
    /// `hs` restricted to labels above `chain[r + 1]`, renormalized.
    pub psi: HistoryState,
    /// Same labels and amplitudes, computational states grown from the
    /// flipped initial state.
    pub phi: HistoryState,
    /// Discarded squared mass.
    pub alpha: f64,
}

/// Labels `p >= chain[r + 1]`; all false when `r + 1 > T`.
pub fn late_labels(hs: &HistoryState, r: usize) -> Vec<bool> {
    let poset = &hs.poset;
    match poset.chain().get(r + 1) {
        Some(&anchor) => (0..poset.len()).map(|p| poset.leq(anchor, p)).collect(),
        None => vec![false; poset.len()],
    }
}

/// Builds `(Psi~, Phi~, alpha)`. `flipped_initial` must be orthogonal to
/// the initial state of `hs` for `<Phi~|Psi> = 0` to hold.
pub fn truncated_states(
    circuit: &Circuit,
    hs: &HistoryState,
    r: usize,
    flipped_initial: &[C64],
) -> Result<Truncation> {
    let keep = late_labels(hs, r);
    let (psi, kept) = hs
        .restricted(&keep)
        .map_err(|_| Error::DegenerateTruncation { r })?;
    let states = computational_states(circuit, flipped_initial, &hs.poset, &hs.junk)?;
    let mut phi = psi.clone();
    phi.comp_states = states;
    Ok(Truncation {
        psi,
        phi,
        alpha: 1.0 - kept,
    })
}

#[derive(Debug, Clone)]
pub struct XiSplit {
    /// Restriction to labels outside `B_{x0}`.
    pub xi0: HistoryState,
    /// Restriction to `B_{x0} = {p : t_p >= x0 r}`.
    pub xi1: HistoryState,
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SplitEnergies {
    pub d0: f64,
    pub d1: f64,
    pub cross: f64,
    /// `lambda D0 + (1 - lambda) D1 + 2 sqrt(lambda (1 - lambda)) cross`.
    pub identity: f64,
    /// Same with cross coefficient `2 lambda (1 - lambda)`.
    pub alternative: f64,
}

/// `Psi = sqrt(lambda) xi0 + sqrt(1 - lambda) xi1`.
pub fn xi_split(hs: &HistoryState, x0: usize, r: usize) -> Result<XiSplit> {
    let cut = x0 * r;
    let in_b: Vec<bool> = (0..hs.len())
        .map(|p| hs.poset.t_p(p).is_some_and(|t| t >= cut))
        .collect();
    let lambda: f64 = (0..hs.len())
        .filter(|&p| !in_b[p])
        .map(|p| hs.amplitudes[p].norm_sqr())
        .sum::<f64>()
        / hs.mass();
    if lambda <= 0.0 || lambda >= 1.0 {
        return Err(Error::DegenerateSplit { lambda });
    }
    let not_b: Vec<bool> = in_b.iter().map(|b| !b).collect();
    let (xi0, _) = hs
        .restricted(&not_b)
        .map_err(|_| Error::DegenerateSplit { lambda })?;
    let (xi1, _) = hs
        .restricted(&in_b)
        .map_err(|_| Error::DegenerateSplit { lambda })?;
    Ok(XiSplit { xi0, xi1, lambda })
}

impl XiSplit {
    /// `D0`, `D1`, `Re<xi0|H|xi1>` and both reconstructions of `<Psi|H|Psi>`.
    pub fn energies(&self, h: &crate::hamiltonian::LocalHamiltonian) -> Result<SplitEnergies> {
        let v0 = self.xi0.to_vector()?;
        let v1 = self.xi1.to_vector()?;
        let h0 = h.apply(&v0)?;
        let h1 = h.apply(&v1)?;
        let d0 = crate::linalg::inner(&v0, &h0).re;
        let d1 = crate::linalg::inner(&v1, &h1).re;
        let cross = crate::linalg::inner(&v0, &h1).re;
        let l = self.lambda;
        Ok(SplitEnergies {
            d0,
            d1,
            cross,
            identity: l * d0 + (1.0 - l) * d1 + 2.0 * (l * (1.0 - l)).sqrt() * cross,
            alternative: l * d0 + (1.0 - l) * d1 + 2.0 * l * (1.0 - l) * cross,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{chain_history_state, uniform_amplitudes, ClockLabeling};
    use crate::linalg;
    use crate::qcircuit::{sample_seeded_circuit, QuditRegister};

    #[test]
    fn flipped_truncation_is_orthogonal() {
        let reg = QuditRegister::new(3, 2).unwrap();
        let c = sample_seeded_circuit(reg, 6, 11).unwrap();
        let hs = chain_history_state(
            &c,
            &uniform_amplitudes(7),
            &reg.zero_state(),
            ClockLabeling::Register,
        )
        .unwrap();
        for r in 0..6 {
            let tr = truncated_states(&c, &hs, r, &reg.flipped_state()).unwrap();
            assert!(tr.phi.inner(&hs).unwrap().norm() < 1e-12);
            assert!((linalg::norm(&tr.phi.to_vector().unwrap()) - 1.0).abs() < 1e-10);
            assert!((tr.alpha - (r + 1) as f64 / 7.0).abs() < 1e-12);
        }
        assert!(matches!(
            truncated_states(&c, &hs, 6, &reg.flipped_state()),
            Err(Error::DegenerateTruncation { r: 6 })
        ));
    }

    #[test]
    fn midpoint_split() {
        let reg = QuditRegister::new(2, 2).unwrap();
        for t_len in [4usize, 5, 8, 9] {
            let c = sample_seeded_circuit(reg, t_len, 3).unwrap();
            let hs = chain_history_state(
                &c,
                &uniform_amplitudes(t_len + 1),
                &reg.zero_state(),
                ClockLabeling::Register,
            )
            .unwrap();
            let cut = (t_len + 2) / 2;
            let s = xi_split(&hs, cut, 1).unwrap();
            assert!((s.lambda - cut as f64 / (t_len + 1) as f64).abs() < 1e-12);
            let v = hs.to_vector().unwrap();
            let v0 = s.xi0.to_vector().unwrap();
            let v1 = s.xi1.to_vector().unwrap();
            assert!(linalg::inner(&v0, &v1).norm() < 1e-12);
            for i in 0..v.len() {
                let w = v0[i] * s.lambda.sqrt() + v1[i] * (1.0 - s.lambda).sqrt();
                assert!((w - v[i]).norm() < 1e-12);
            }
        }
    }
}
