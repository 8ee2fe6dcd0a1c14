use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg::{inner, norm, C64, ZERO};

/// A Hermitian linear map.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

impl LinearOperator for crate::hamiltonian::SparseOperator {
    fn dim(&self) -> usize {
        crate::hamiltonian::SparseOperator::dim(self)
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        self.matvec_into(x, y)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub tol: f64,
    /// Spectrum is shifted by `-shift` before iterating.
    pub shift: f64,
}

pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<C64>,
    pub residual: f64,
}

fn project_out(w: &mut [C64], basis: &[Vec<C64>]) {
    for q in basis {
        let c = inner(q, w);
        if c != ZERO {
            for (wi, qi) in w.iter_mut().zip(q) {
                *wi -= c * qi;
            }
        }
    }
}

/// Lowest eigenpair of `A` on the orthogonal complement of `deflate`
/// (whose members must be orthonormal eigenvectors of `A`).
///
/// Explicitly restarted Lanczos with full reorthogonalization; each restart
/// begins from the current best Ritz vector.
pub fn lowest_eigenpair<A: LinearOperator + ?Sized>(
    a: &A,
    deflate: &[Vec<C64>],
    start: Vec<C64>,
    opts: &LanczosOptions,
) -> Result<Eigenpair> {
    let dim = a.dim();
    let free = dim.saturating_sub(deflate.len());
    if free == 0 {
        return Err(Error::InvalidParameter(
            "deflation exhausts the space".into(),
        ));
    }
    let m = opts.krylov_dim.max(2).min(free);
    let shifted = |x: &[C64], y: &mut [C64]| {
        a.apply(x, y);
        if opts.shift != 0.0 {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi -= xi * opts.shift;
            }
        }
    };

    let mut v = start;
    let mut best_residual = f64::INFINITY;
    let mut w = vec![ZERO; dim];
    for restart in 0..=opts.max_restarts {
        project_out(&mut v, deflate);
        project_out(&mut v, deflate);
        let nv = norm(&v);
        if nv < 1e-300 {
            return Err(Error::InvalidParameter(
                "Lanczos start vector lies in the deflated space".into(),
            ));
        }
        v.iter_mut().for_each(|x| *x /= nv);

        let mut basis: Vec<Vec<C64>> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::with_capacity(m);
        let mut betas: Vec<f64> = Vec::with_capacity(m);
        loop {
            let j = basis.len() - 1;
            shifted(&basis[j], &mut w);
            let alpha = inner(&basis[j], &w).re;
            alphas.push(alpha);
            for _ in 0..2 {
                project_out(&mut w, deflate);
                project_out(&mut w, &basis);
            }
            let beta = norm(&w);
            let scale = alphas.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
            if basis.len() == m || beta <= 1e-14 * scale {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| x / beta).collect());
        }

        let k = alphas.len();
        let mut tri = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            tri[(i, i)] = alphas[i];
            if i + 1 < k {
                tri[(i, i + 1)] = betas[i];
                tri[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(tri);
        let (idx, theta) = eig
            .eigenvalues
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty tridiagonal");
        let mut y = vec![ZERO; dim];
        for (i, q) in basis.iter().enumerate() {
            let c = eig.eigenvectors[(i, idx)];
            for (yi, qi) in y.iter_mut().zip(q) {
                *yi += qi * c;
            }
        }
        let ny = norm(&y);
        y.iter_mut().for_each(|x| *x /= ny);

        shifted(&y, &mut w);
        let residual = w
            .iter()
            .zip(&y)
            .map(|(wi, yi)| (wi - yi * theta).norm_sqr())
            .sum::<f64>()
            .sqrt();
        best_residual = best_residual.min(residual);
        if residual <= opts.tol {
            return Ok(Eigenpair {
                value: theta + opts.shift,
                vector: y,
                residual,
            });
        }
        if restart == opts.max_restarts {
            break;
        }
        v = y;
    }
    Err(Error::Convergence {
        restarts: opts.max_restarts,
        residual: best_residual,
    })
}
