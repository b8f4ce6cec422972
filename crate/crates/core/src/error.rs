use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("vertex {vertex:?} is outside the domain")]
    OutOfDomain { vertex: Vec<i64> },

    #[error("shape mismatch: expected {expected:?}, got {got:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("exponent p = {0} is below 1")]
    InvalidExponent(f64),

    #[error("input {0} lies on the branch cut")]
    BranchCut(String),

    #[error("data violates a compatibility condition: {0}")]
    Incompatible(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("iteration stopped contracting at step {step} (norm {norm:e})")]
    NonContraction { step: usize, norm: f64 },

    #[error("random walk exceeded the step cap {cap} more than {attempts} times")]
    CapExhausted { cap: u64, attempts: u32 },

    #[error("missing dyadic family member for index {0:?}")]
    MissingSymbol(Vec<i64>),

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("cell {cell}: {source}")]
    Cell { cell: String, source: Box<Error> },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
