use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the classifier pipeline.
#[derive(Debug, Error)]
pub enum VqcError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("numerical failure at epoch {epoch}, batch {batch}: {message}")]
    NumericalFailure {
        epoch: usize,
        batch: usize,
        message: String,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("{path}: line {line}{}: {message}", column.as_ref().map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        path: PathBuf,
        line: u64,
        column: Option<String>,
        message: String,
    },

    #[error("{path}: unsupported model format version {found:?} (expected {expected:?})")]
    Version {
        path: PathBuf,
        found: String,
        expected: String,
    },

    #[error("{path}: corrupted model file: {message}")]
    Corrupt { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl VqcError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        VqcError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        VqcError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, VqcError>;
