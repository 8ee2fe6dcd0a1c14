//! Dense complex linear algebra helpers and the tensor-index bookkeeping
//! shared by gate application, local-term contraction and sparse assembly.
//!
//! Basis ordering is big-endian throughout: qudit 0 is the most significant
//! digit of a flat index.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Flat-index geometry of a register of qudits with arbitrary local dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    dims: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Layout {
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidDimension(format!(
                "zero local dimension in {dims:?}"
            )));
        }
        let mut strides = vec![1usize; dims.len()];
        let mut total: usize = 1;
        for q in (0..dims.len()).rev() {
            strides[q] = total;
            total = total.checked_mul(dims[q]).ok_or_else(|| Error::Resource {
                what: "state dimension".into(),
                required: dims.iter().map(|&d| d as u128).product(),
                available: usize::MAX as u128,
            })?;
        }
        Ok(Self {
            dims: dims.to_vec(),
            strides,
            total,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn stride(&self, q: usize) -> usize {
        self.strides[q]
    }

    pub fn digit(&self, index: usize, q: usize) -> usize {
        (index / self.strides[q]) % self.dims[q]
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|q| self.digit(index, q)).collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.strides).map(|(&x, &s)| x * s).sum()
    }

    /// Dimension of the sub-block spanned by `support`.
    pub fn block_dim(&self, support: &[usize]) -> usize {
        support.iter().map(|&q| self.dims[q]).product()
    }

    /// Flat offsets of every local basis state of `support`.
    pub fn offsets(&self, support: &[usize]) -> Vec<usize> {
        mixed_radix(support.iter().map(|&q| (self.dims[q], self.strides[q])))
    }

    /// Offsets of every local basis state of `support` and the flat indices
    /// of all basis states with zero digits on `support`.
    pub fn block(&self, support: &[usize]) -> Block {
        let offsets = self.offsets(support);
        let complement: Vec<usize> = (0..self.dims.len())
            .filter(|q| !support.contains(q))
            .collect();
        let bases = mixed_radix(complement.iter().map(|&q| (self.dims[q], self.strides[q])));
        Block { offsets, bases }
    }
}

/// Flat indices produced by counting through `(dim, stride)` digits,
/// first digit most significant.
fn mixed_radix(digits: impl Iterator<Item = (usize, usize)> + Clone) -> Vec<usize> {
    let mut out = vec![0usize];
    for (dim, stride) in digits {
        let mut next = Vec::with_capacity(out.len() * dim);
        for &base in &out {
            for x in 0..dim {
                next.push(base + x * stride);
            }
        }
        out = next;
    }
    out
}

#[derive(Debug, Clone)]
pub struct Block {
    pub offsets: Vec<usize>,
    pub bases: Vec<usize>,
}

/// `output += M · input` where `M` acts on `support` of the register.
pub fn apply_dense_local(
    layout: &Layout,
    support: &[usize],
    matrix: &CMatrix,
    input: &[C64],
    output: &mut [C64],
) {
    let block = layout.block(support);
    let s = block.offsets.len();
    debug_assert_eq!(matrix.nrows(), s);
    let mut local = vec![ZERO; s];
    for &base in &block.bases {
        for (a, &off) in block.offsets.iter().enumerate() {
            local[a] = input[base + off];
        }
        for (i, &off) in block.offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (j, x) in local.iter().enumerate() {
                acc += matrix[(i, j)] * x;
            }
            output[base + off] += acc;
        }
    }
}

/// In-place `state <- M · state` for `M` acting on `support`.
pub fn apply_dense_local_inplace(
    layout: &Layout,
    support: &[usize],
    matrix: &CMatrix,
    state: &mut [C64],
) {
    let block = layout.block(support);
    let s = block.offsets.len();
    let mut local = vec![ZERO; s];
    for &base in &block.bases {
        for (a, &off) in block.offsets.iter().enumerate() {
            local[a] = state[base + off];
        }
        for (i, &off) in block.offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (j, x) in local.iter().enumerate() {
                acc += matrix[(i, j)] * x;
            }
            state[base + off] = acc;
        }
    }
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(a: &mut [C64]) -> f64 {
    let nrm = norm(a);
    if nrm > 0.0 {
        for x in a.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

pub fn basis_vector(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

/// Kronecker product of two state vectors (first argument most significant).
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Largest entry of `|M - M^dagger|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    hermitian_eigenvalues(m)
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn hermitian_trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Trace norm of an arbitrary square matrix (sum of singular values).
pub fn trace_norm(m: &CMatrix) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// `Tr_{complement of keep} |ket><bra|` for pure vectors on `layout`.
///
/// The result is indexed by the digits of `keep` in the given order.
pub fn partial_trace_outer(layout: &Layout, keep: &[usize], ket: &[C64], bra: &[C64]) -> CMatrix {
    let block = layout.block(keep);
    let s = block.offsets.len();
    let mut out = CMatrix::zeros(s, s);
    for &base in &block.bases {
        for (i, &oi) in block.offsets.iter().enumerate() {
            let k = ket[base + oi];
            if k == ZERO {
                continue;
            }
            for (j, &oj) in block.offsets.iter().enumerate() {
                out[(i, j)] += k * bra[base + oj].conj();
            }
        }
    }
    out
}

/// `max |U U^dagger - I|` entrywise.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let prod = u * u.adjoint();
    let mut worst: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Maximum absolute row sum, i.e. the induced infinity norm.
pub fn inf_norm(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_is_big_endian() {
        let layout = Layout::new(&[3, 2, 2]).unwrap();
        assert_eq!(layout.total(), 12);
        assert_eq!(layout.index(&[1, 0, 1]), 5);
        assert_eq!(layout.digits(5), vec![1, 0, 1]);
    }

    #[test]
    fn block_partitions_the_index_space() {
        let layout = Layout::new(&[2, 3, 2]).unwrap();
        let block = layout.block(&[0, 2]);
        let mut seen: Vec<usize> = block
            .bases
            .iter()
            .flat_map(|b| block.offsets.iter().map(move |o| b + o))
            .collect();
        seen.sort();
        assert_eq!(seen, (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let layout = Layout::new(&[2, 2]).unwrap();
        let plus = [C64::new(0.5f64.sqrt(), 0.0), C64::new(0.5f64.sqrt(), 0.0)];
        let zero = [ONE, ZERO];
        let psi = kron_vec(&plus, &zero);
        let rho = partial_trace_outer(&layout, &[0], &psi, &psi);
        for i in 0..2 {
            for j in 0..2 {
                assert!((rho[(i, j)] - C64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
        let rho1 = partial_trace_outer(&layout, &[1], &psi, &psi);
        assert!((rho1[(0, 0)] - ONE).norm() < 1e-15);
        assert!(rho1[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::new(2.0, 0.0),
            C64::new(-1.0, 0.0),
            C64::new(0.5, 0.0),
        ]));
        let (vals, vecs) = hermitian_eigen(&m);
        assert_eq!(vals, vec![-1.0, 0.5, 2.0]);
        assert!((vecs[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((hermitian_trace_norm(&m) - 3.5).abs() < 1e-14);
        assert!((trace_norm(&m) - 3.5).abs() < 1e-12);
    }
}
