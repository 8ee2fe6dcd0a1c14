//! Named test Hamiltonians used to probe the normalization assumptions and
//! to contrast gapped and gapless behaviour.

use super::{compile_feynman_kitaev, CompileOptions, FkHamiltonian, LocalHamiltonian, LocalTerm};
use crate::error::{Error, Result};
use crate::linalg::{C64, ONE};
use crate::qcircuit::Circuit;

/// `copies` identical copies of `term`. Same spectrum as `copies * term`,
/// but the per-qudit strength grows linearly with `copies`.
pub fn duplicated_terms(
    dims: Vec<usize>,
    term: &LocalTerm,
    copies: usize,
) -> Result<LocalHamiltonian> {
    LocalHamiltonian::new(dims, vec![term.clone(); copies])
}

/// Laplacian of the `log2(vertices)`-dimensional hypercube in one-hot
/// encoding: qubit `v` is excited iff the walker sits on vertex `v`.
///
/// Returns the Hamiltonian and the flat indices of the single-excitation
/// sector, on which it equals the graph Laplacian.
pub fn hypercube_laplacian(vertices: usize) -> Result<(LocalHamiltonian, Vec<usize>)> {
    if vertices < 2 || !vertices.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "hypercube needs a power-of-two vertex count >= 2, got {vertices}"
        )));
    }
    if vertices >= usize::BITS as usize {
        return Err(Error::Resource {
            what: "one-hot hypercube register".into(),
            required: vertices as u128,
            available: usize::BITS as u128 - 1,
        });
    }
    let dim_cube = vertices.trailing_zeros() as usize;
    let mut terms = Vec::new();
    for v in 0..vertices {
        for b in 0..dim_cube {
            let w = v ^ (1 << b);
            if v < w {
                terms.push(LocalTerm::from_entries(
                    vec![v, w],
                    vec![2, 2],
                    [
                        (0b01, 0b01, ONE),
                        (0b10, 0b10, ONE),
                        (0b01, 0b10, -ONE),
                        (0b10, 0b01, -ONE),
                    ],
                )?);
            }
        }
    }
    let sector = (0..vertices)
        .map(|v| 1usize << (vertices - 1 - v))
        .collect();
    Ok((LocalHamiltonian::new(vec![2; vertices], terms)?, sector))
}

/// Full register-clock compilation with `-|0><0|_clock (x) |0^n><0^n|` added.
/// The bonus pins the ground state near `t = 0`, so its amplitudes decay
/// geometrically in `t` and the gap stays open as `T` grows.
pub fn input_bonus(circuit: &Circuit) -> Result<FkHamiltonian> {
    let mut fk = compile_feynman_kitaev(circuit, &CompileOptions::default())?;
    let support: Vec<usize> = (0..fk.hamiltonian.m()).collect();
    let dims = fk.hamiltonian.dims().to_vec();
    fk.hamiltonian
        .push(LocalTerm::from_entries(support, dims, [(0, 0, -ONE)])?)?;
    Ok(fk)
}

/// `I - |0,0^n><0,0^n|` on a register clock of dimension `T+1` and `n`
/// qudits of dimension `d`: unit gap, unique ground state.
pub fn trivial_gapped(n: usize, d: usize, t_len: usize) -> Result<LocalHamiltonian> {
    let mut dims = vec![t_len + 1];
    dims.extend(std::iter::repeat_n(d, n));
    let total: usize = dims.iter().product();
    let support: Vec<usize> = (0..dims.len()).collect();
    let entries = (1..total).map(|i| (i, i, C64::new(1.0, 0.0)));
    LocalHamiltonian::new(
        dims.clone(),
        vec![LocalTerm::from_entries(support, dims, entries)?],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::gamma_norm;
    use crate::linalg::hermitian_eigenvalues;

    #[test]
    fn hypercube_gap_is_two_and_gamma_grows() {
        for vertices in [4usize, 8, 16] {
            let (h, sector) = hypercube_laplacian(vertices).unwrap();
            let ev = hermitian_eigenvalues(&h.sector_matrix(&sector).unwrap());
            assert!(ev[0].abs() < 1e-12);
            assert!((ev[1] - 2.0).abs() < 1e-10);
            let g = gamma_norm(&h).unwrap().gamma;
            assert!((g - 2.0 * vertices.trailing_zeros() as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn duplication_scales_gamma() {
        let t = LocalTerm::from_entries(vec![0], vec![2], [(0, 0, ONE)]).unwrap();
        let h = duplicated_terms(vec![2], &t, 7).unwrap();
        assert!((gamma_norm(&h).unwrap().gamma - 7.0).abs() < 1e-12);
    }
}
