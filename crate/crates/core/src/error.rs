use thiserror::Error;

/// Errors produced by tensor algebra, decomposition and I/O routines.
#[derive(Debug, Error)]
pub enum TrError {
    #[error("mode {mode} out of range for order-{order} tensor")]
    ModeOutOfRange { mode: usize, order: usize },

    #[error("invalid shape {0:?}: every extent must be at least 1 and the order at least 1")]
    InvalidShape(Vec<usize>),

    #[error("data length {len} does not match shape product {expected}")]
    DataLength { len: usize, expected: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index:?} out of range for shape {shape:?}")]
    IndexOutOfRange { index: Vec<usize>, shape: Vec<usize> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid projection: {0}")]
    InvalidProjection(String),

    #[error("reference tensor has zero Frobenius norm")]
    ZeroNorm,

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TrError>;

impl From<ndarray_linalg::error::LinalgError> for TrError {
    fn from(err: ndarray_linalg::error::LinalgError) -> Self {
        TrError::Linalg(err.to_string())
    }
}
