use thiserror::Error;

/// Errors raised by graph construction, spectral routines and interpolation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GsiError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("node {0} has zero degree; the Markov matrix is undefined")]
    IsolatedNode(usize),

    #[error("node index {index} out of range for a graph with {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("affinity matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),

    #[error("invalid edge weight {weight} at ({i}, {j})")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("graph has {n} nodes, above the full decomposition limit of {limit}; use the Nystrom path")]
    TooLarge { n: usize, limit: usize },

    #[error("eigenvalue {value:e} of the sampled block is numerically zero; use revised mode")]
    SingularBlock { value: f64 },

    #[error("l1 problem is infeasible (phase-one residual {0:e})")]
    Infeasible(f64),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, GsiError>;

impl From<std::io::Error> for GsiError {
    fn from(e: std::io::Error) -> Self {
        GsiError::Io(e.to_string())
    }
}
