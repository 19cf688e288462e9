use thiserror::Error;

/// Errors produced by the library and surfaced by the command line tool.
#[derive(Debug, Error)]
pub enum Error {
    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergent { iterations: usize, residual: f64 },

    #[error("row {row} of the weight matrix sums to {sum}, expected 1")]
    NotRowStochastic { row: usize, sum: f64 },

    #[error("weight matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("linear system is singular or numerically unstable")]
    SingularSystem,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("k = {k} is out of range for n = {n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("agent {0} is already in the selected set")]
    AlreadySelected(usize),

    #[error("agent sets overlap at index {0}")]
    OverlappingSets(usize),

    #[error("exhaustive search over {count} subsets exceeds the limit of {limit}")]
    CombinatorialBlowup { count: u128, limit: u128 },

    #[error("enumeration over {agents} agents exceeds the limit of {limit}")]
    EnumerationGuard { agents: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergent { .. } | Error::SingularSystem => 3,
            Error::CombinatorialBlowup { .. } | Error::EnumerationGuard { .. } => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
