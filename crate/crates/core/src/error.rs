use thiserror::Error;

/// Errors produced by the workbench.
///
/// Every variant maps onto one of the command-line exit codes through
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("no valid gate site: a nearest-neighbour circuit needs n >= 2 qudits, got n = {0}")]
    NoValidSite(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("term {term} is not Hermitian (max |h_ij - conj(h_ji)| = {defect:e})")]
    NonHermitian { term: usize, defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("resource limit exceeded for {what}: requires {required}, available {available}")]
    Resource {
        what: String,
        required: u128,
        available: u128,
    },

    #[error("incomplete specification: {0}")]
    IncompleteSpecification(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("degenerate truncation: no amplitude mass beyond r = {r}")]
    DegenerateTruncation { r: usize },

    #[error("degenerate split: lambda = {lambda}")]
    DegenerateSplit { lambda: f64 },

    #[error("eigensolver did not converge after {restarts} restarts (residual {residual:e})")]
    Convergence { restarts: usize, residual: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 validation, 3 resource, 4 solver non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource { .. } => 3,
            Error::Convergence { .. } => 4,
            _ => 2,
        }
    }
}
