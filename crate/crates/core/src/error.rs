use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("sample must contain at least {min} values, got {got}")]
    SampleTooSmall { min: usize, got: usize },

    #[error("value at index {index} is not finite")]
    NonFinite { index: usize },

    #[error("sample is not sorted in nondecreasing order at index {index}")]
    NotSorted { index: usize },

    #[error("dataset has {rows} rows, at least {min} are required")]
    TooFewRows { rows: usize, min: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("eigendecomposition produced a non-finite eigenvalue")]
    NonFiniteEigenvalue,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("cluster {cluster} has {size} point(s); splitting needs at least 2")]
    SingletonCluster { cluster: usize, size: usize },

    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("{path}: row {row}, column {column}: {message}")]
    CsvCell {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
