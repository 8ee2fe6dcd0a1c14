//! The hypercube random-walk Laplacian keeps a constant gap while its
//! per-qudit norm grows with the dimension.

use histgap::hamiltonian::{fixtures::hypercube_laplacian, gamma_norm};
use histgap::linalg::hermitian_eigenvalues;

fn main() -> histgap::Result<()> {
    for v in [4, 8, 16, 32] {
        let (h, sector) = hypercube_laplacian(v)?;
        let ev = hermitian_eigenvalues(&h.sector_matrix(&sector)?);
        let gap = ev.iter().find(|&&e| e > ev[0] + 1e-10).unwrap() - ev[0];
        println!(
            "T={v:2}: gap {gap:.6}, gamma {:.3}, log2 T = {}",
            gamma_norm(&h)?.gamma,
            v.trailing_zeros()
        );
    }
    Ok(())
}
