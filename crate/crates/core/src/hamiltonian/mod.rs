//! Local Hamiltonians over clock and computational qudits.
//!
//! `m` counts every qudit of the system: clock qudits first, then the
//! computational register.

mod compile;
pub mod fixtures;
mod norm;
mod sparse;
mod term;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use compile::{compile_feynman_kitaev, ClockKind, CompileOptions, FkHamiltonian, Rescale};
pub use norm::{gamma_norm, quasi_local_norm, NormalizationReport};
pub use sparse::{assemble, assemble_with_cap, SparseOperator, DEFAULT_ASSEMBLY_CAP};
pub use term::LocalTerm;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Layout, C64, ZERO};
use crate::qcircuit::{matrix_from_parts, matrix_to_parts};

#[derive(Debug, Clone, PartialEq)]
pub struct LocalHamiltonian {
    dims: Vec<usize>,
    terms: Vec<LocalTerm>,
}

impl LocalHamiltonian {
    pub fn new(dims: Vec<usize>, terms: Vec<LocalTerm>) -> Result<Self> {
        let h = Self { dims, terms };
        h.validate_structure()?;
        Ok(h)
    }

    pub fn empty(dims: Vec<usize>) -> Self {
        Self {
            dims,
            terms: Vec::new(),
        }
    }

    fn validate_structure(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::InvalidDimension("zero local dimension".into()));
        }
        for (idx, t) in self.terms.iter().enumerate() {
            self.check_term(idx, t)?;
        }
        Ok(())
    }

    fn check_term(&self, idx: usize, t: &LocalTerm) -> Result<()> {
        for (&q, &dq) in t.support().iter().zip(t.local_dims()) {
            if q >= self.dims.len() {
                return Err(Error::Validation(format!(
                    "term {idx} touches qudit {q} but the system has {} qudits",
                    self.dims.len()
                )));
            }
            if self.dims[q] != dq {
                return Err(Error::Validation(format!(
                    "term {idx} assumes dim {dq} on qudit {q}, system has {}",
                    self.dims[q]
                )));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, term: LocalTerm) -> Result<()> {
        self.check_term(self.terms.len(), &term)?;
        self.terms.push(term);
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total qudit count `m`.
    pub fn m(&self) -> usize {
        self.dims.len()
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    /// Largest support size over all terms.
    pub fn locality(&self) -> usize {
        self.terms.iter().map(|t| t.k()).max().unwrap_or(0)
    }

    pub fn total_dim(&self) -> Result<usize> {
        Ok(Layout::new(&self.dims)?.total())
    }

    pub fn layout(&self) -> Result<Layout> {
        Layout::new(&self.dims)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dims: self.dims.clone(),
            terms: self.terms.iter().map(|t| t.scaled(factor)).collect(),
        }
    }

    /// Errors on the first term whose Hermiticity defect exceeds `1e-12`.
    pub fn check_hermitian(&self) -> Result<()> {
        for (idx, t) in self.terms.iter().enumerate() {
            let defect = t.hermiticity_defect();
            if defect > 1e-12 {
                return Err(Error::NonHermitian { term: idx, defect });
            }
        }
        Ok(())
    }

    /// Matrix-free `H v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let layout = self.layout()?;
        if v.len() != layout.total() {
            return Err(Error::DimensionMismatch {
                expected: layout.total(),
                actual: v.len(),
            });
        }
        let mut out = vec![ZERO; v.len()];
        for t in &self.terms {
            t.apply(&layout, v, &mut out);
        }
        Ok(out)
    }

    /// Matrix of `H` compressed to the span of the given flat basis states.
    ///
    /// Entries leaving the span are dropped, so the result is the exact
    /// restriction only when the span is invariant.
    pub fn sector_matrix(&self, basis: &[usize]) -> Result<CMatrix> {
        let layout = self.layout()?;
        let pos: HashMap<usize, usize> = basis.iter().enumerate().map(|(p, &b)| (b, p)).collect();
        let mut m = CMatrix::zeros(basis.len(), basis.len());
        for t in &self.terms {
            let offsets = layout.offsets(t.support());
            let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); t.dim()];
            for &(i, j, v) in t.entries() {
                by_col[j].push((i, v));
            }
            for (cpos, &b) in basis.iter().enumerate() {
                let j = t.local_index(&layout, b);
                let base = b - offsets[j];
                for &(i, v) in &by_col[j] {
                    if let Some(&rpos) = pos.get(&(base + offsets[i])) {
                        m[(rpos, cpos)] += v;
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = HamiltonianJson {
            dims: self.dims.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| {
                    let (h_re, h_im) = matrix_to_parts(&t.to_dense());
                    TermJson {
                        support: t.support().to_vec(),
                        h_re,
                        h_im,
                    }
                })
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: HamiltonianJson = serde_json::from_str(text)?;
        let mut terms = Vec::with_capacity(doc.terms.len());
        for (idx, t) in doc.terms.iter().enumerate() {
            let local_dims = t
                .support
                .iter()
                .map(|&q| {
                    doc.dims.get(q).copied().ok_or_else(|| {
                        Error::Validation(format!("term {idx} touches missing qudit {q}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let m = matrix_from_parts(&t.h_re, &t.h_im)?;
            terms.push(LocalTerm::from_dense(t.support.clone(), local_dims, &m)?);
        }
        Self::new(doc.dims, terms)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    support: Vec<usize>,
    h_re: Vec<Vec<f64>>,
    h_im: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct HamiltonianJson {
    dims: Vec<usize>,
    terms: Vec<TermJson>,
}
