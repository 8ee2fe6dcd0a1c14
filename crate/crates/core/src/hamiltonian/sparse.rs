use rayon::prelude::*;

use super::LocalHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64, ZERO};

/// Default ceiling on the assembled dimension.
pub const DEFAULT_ASSEMBLY_CAP: usize = 1 << 22;

/// Row-compressed Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOperator {
    /// Builds from triples; duplicates are summed in insertion order.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let mut trip = Vec::new();
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)] != ZERO {
                    trip.push((i, j, m[(i, j)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), trip)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(p) => self.values[range.start + p],
            Err(_) => ZERO,
        }
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![ZERO; self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    /// `y = A x`; rows are independent so the parallel split is deterministic.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut()
            .with_min_len(1024)
            .enumerate()
            .for_each(|(i, yi)| {
                let mut acc = ZERO;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.values[p] * x[self.col_idx[p]];
                }
                *yi = acc;
            });
    }

    pub fn quadratic_form(&self, x: &[C64]) -> C64 {
        let y = self.matvec(x);
        crate::linalg::inner(x, &y)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Gershgorin interval `[lo, hi]` containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dim {
            let mut center = 0.0;
            let mut radius = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    center = v.re;
                } else {
                    radius += v.norm();
                }
            }
            lo = lo.min(center - radius);
            hi = hi.max(center + radius);
        }
        if self.dim == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

pub fn assemble(h: &LocalHamiltonian) -> Result<SparseOperator> {
    assemble_with_cap(h, DEFAULT_ASSEMBLY_CAP)
}

/// `sum_Z h_Z tensor I`, terms inserted in list order; fails if the
/// result is not Hermitian to `1e-12`.
pub fn assemble_with_cap(h: &LocalHamiltonian, cap: usize) -> Result<SparseOperator> {
    let required: u128 = h.dims().iter().map(|&d| d as u128).product();
    if required > cap as u128 {
        return Err(Error::Resource {
            what: "assembled operator dimension".into(),
            required,
            available: cap as u128,
        });
    }
    h.check_hermitian()?;
    let layout = h.layout()?;
    let mut triplets = Vec::new();
    for t in h.terms() {
        let block = layout.block(t.support());
        triplets.reserve(block.bases.len() * t.entries().len());
        for &base in &block.bases {
            for &(i, j, v) in t.entries() {
                triplets.push((base + block.offsets[i], base + block.offsets[j], v));
            }
        }
    }
    let op = SparseOperator::from_triplets(layout.total(), triplets);
    let defect = op.hermiticity_defect();
    if defect > 1e-12 {
        return Err(Error::Validation(format!(
            "assembled operator not Hermitian (defect {defect:e})"
        )));
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::LocalTerm;
    use crate::linalg::ONE;

    #[test]
    fn empty_hamiltonian_is_zero() {
        let h = LocalHamiltonian::empty(vec![2, 3]);
        let a = assemble(&h).unwrap();
        assert_eq!(a.dim(), 6);
        assert_eq!(a.nnz(), 0);
    }

    #[test]
    fn full_support_term_is_itself() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                C64::new(i as f64, 0.0)
            } else {
                C64::new(0.1, 0.2 * (j as f64 - i as f64))
            }
        });
        let t = LocalTerm::from_dense(vec![0, 1], vec![2, 2], &m).unwrap();
        let h = LocalHamiltonian::new(vec![2, 2], vec![t]).unwrap();
        assert!((assemble(&h).unwrap().to_dense() - m).norm() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let h = LocalHamiltonian::empty(vec![2; 10]);
        match assemble_with_cap(&h, 512) {
            Err(Error::Resource {
                required,
                available,
                ..
            }) => {
                assert_eq!(required, 1024);
                assert_eq!(available, 512);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gershgorin_contains_spectrum() {
        let t = LocalTerm::from_entries(vec![0], vec![2], [(0, 1, ONE), (1, 0, ONE)]).unwrap();
        let h = LocalHamiltonian::new(vec![2], vec![t]).unwrap();
        let (lo, hi) = assemble(&h).unwrap().gershgorin();
        assert!(lo <= -1.0 && hi >= 1.0);
    }
}
