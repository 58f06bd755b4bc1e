use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix has no nonzero entries")]
    ZeroMatrix,

    #[error("no convergence after {iterations} iterations (best estimate {estimate})")]
    NoConvergence { estimate: f64, iterations: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("subspace coordinate {index} is zero")]
    ZeroOnSupport { index: usize },

    #[error("subspace gradient vanishes")]
    ZeroGradient,

    #[error("Newton system could not be solved after {retries} regularization retries")]
    SolveFailure { retries: usize },

    #[error("proximal-gradient backtracking exhausted after {0} trials")]
    BacktrackExhausted(usize),

    #[error("Armijo search exhausted after {0} trials")]
    ArmijoExhausted(usize),

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("input file contains no data rows")]
    EmptyFile,

    #[error("lambda scaling base is zero")]
    DegenerateScale,

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
