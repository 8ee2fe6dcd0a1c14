use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, Layout, C64, ZERO};

/// Hermitian operator on a sorted set of qudits, stored as sorted
/// `(row, col, value)` triples over the local product basis of its support.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    support: Vec<usize>,
    local_dims: Vec<usize>,
    entries: Vec<(usize, usize, C64)>,
}

impl LocalTerm {
    pub fn from_entries(
        support: Vec<usize>,
        local_dims: Vec<usize>,
        entries: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Validation("term with empty support".into()));
        }
        if support.len() != local_dims.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                actual: local_dims.len(),
            });
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "term support {support:?} is not strictly increasing"
            )));
        }
        let dim: usize = local_dims.iter().product();
        let mut merged: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: i.max(j) + 1,
                });
            }
            *merged.entry((i, j)).or_insert(ZERO) += v;
        }
        let entries = merged
            .into_iter()
            .filter(|(_, v)| *v != ZERO)
            .map(|((i, j), v)| (i, j, v))
            .collect();
        Ok(Self {
            support,
            local_dims,
            entries,
        })
    }

    pub fn from_dense(support: Vec<usize>, local_dims: Vec<usize>, m: &CMatrix) -> Result<Self> {
        let dim: usize = local_dims.iter().product();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: m.nrows(),
            });
        }
        let entries = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, m[(i, j)]))
            .collect::<Vec<_>>();
        Self::from_entries(support, local_dims, entries)
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    /// Locality `k(Z) = |Z|`.
    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            support: self.support.clone(),
            local_dims: self.local_dims.clone(),
            entries: self
                .entries
                .iter()
                .map(|&(i, j, v)| (i, j, v * factor))
                .filter(|(_, _, v)| *v != ZERO)
                .collect(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let lookup: BTreeMap<(usize, usize), C64> =
            self.entries.iter().map(|&(i, j, v)| ((i, j), v)).collect();
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                let w = lookup.get(&(j, i)).copied().unwrap_or(ZERO);
                (v - w.conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Dense matrix restricted to the local basis states that carry entries;
    /// the complement is annihilated so the spectrum differs only by zeros.
    pub fn compressed(&self) -> CMatrix {
        let mut active: Vec<usize> = self.entries.iter().flat_map(|&(i, j, _)| [i, j]).collect();
        active.sort_unstable();
        active.dedup();
        let pos: BTreeMap<usize, usize> = active.iter().enumerate().map(|(p, &i)| (i, p)).collect();
        let mut m = CMatrix::zeros(active.len(), active.len());
        for &(i, j, v) in &self.entries {
            m[(pos[&i], pos[&j])] = v;
        }
        m
    }

    /// `||h||_inf` for a Hermitian term.
    pub fn operator_norm(&self) -> f64 {
        linalg::hermitian_operator_norm(&self.compressed())
    }

    /// `output += (h tensor I) input` on the full register.
    pub fn apply(&self, layout: &Layout, input: &[C64], output: &mut [C64]) {
        let block = layout.block(&self.support);
        for &base in &block.bases {
            for &(i, j, v) in &self.entries {
                output[base + block.offsets[i]] += v * input[base + block.offsets[j]];
            }
        }
    }

    /// Local basis index of the support digits of a flat index.
    pub fn local_index(&self, layout: &Layout, flat: usize) -> usize {
        self.support
            .iter()
            .zip(&self.local_dims)
            .fold(0, |acc, (&q, &dq)| acc * dq + layout.digit(flat, q))
    }
}
