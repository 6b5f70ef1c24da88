use std::io;
use std::path::PathBuf;

use tensor_ring::TrError;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid argument: {0}")]
    Args(String),
    #[error("{path}: {reason}")]
    Data { path: PathBuf, reason: String },
    #[error("image error: {0}")]
    Image(#[from] image::ImageError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Tr(#[from] TrError),
}

pub type Result<T> = std::result::Result<T, BenchError>;

impl BenchError {
    pub(crate) fn data(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        BenchError::Data {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code: 2 argument error, 3 data-format error, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Args(_) => 2,
            BenchError::Data { .. } | BenchError::Image(_) | BenchError::Csv(_) | BenchError::Io(_) => 3,
            BenchError::Tr(e) => match e {
                TrError::Divergence(_) | TrError::Linalg(_) | TrError::ZeroNorm => 4,
                TrError::Format(_) | TrError::Io(_) | TrError::DataLength { .. } => 3,
                _ => 2,
            },
        }
    }
}
