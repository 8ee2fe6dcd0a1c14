// `!(x > 0.0)` guards reject NaN as well as non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod history;
pub mod linalg;
pub mod qcircuit;
pub mod report;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
