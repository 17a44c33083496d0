use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the chart domain")]
    Domain { point: [f64; 2] },

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("field does not belong to this grid ({0})")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported surrogate class: {0}")]
    UnsupportedSurrogate(String),

    #[error("solver unstable at t = {t}: sup norm grew from {before} to {after}")]
    Instability { t: f64, before: f64, after: f64 },

    #[error("oracle not applicable: {0}")]
    Oracle(String),

    #[error("{path}:{line}: {message}")]
    Config {
        path: String,
        line: usize,
        message: String,
    },

    #[error("csv parse error in {path}: {message}")]
    Csv { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
