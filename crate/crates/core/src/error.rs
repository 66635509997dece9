use thiserror::Error;

use crate::mm::ValidationReport;

pub type Result<T, E = MmError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("invalid mm-space: {0}")]
    InvalidSpace(ValidationReport),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("map is not total: source index {index} has no image")]
    PartialMap { index: usize },

    #[error("pseudo-metric violation: d({i},{k}) = {direct} exceeds d({i},{j}) + d({j},{k}) = {via}")]
    PseudoMetricViolation { i: usize, j: usize, k: usize, direct: f64, via: f64 },

    #[error("size guard exceeded: {what} is {actual}, limit {limit}")]
    SizeGuard { what: &'static str, actual: usize, limit: usize },

    #[error("resource cap exceeded: {0}; reduce m")]
    Resource(String),

    #[error("observable requires embedded coordinates but the space has only a distance matrix")]
    MissingEmbedding,

    #[error("candidate family is empty")]
    EmptyFamily,

    #[error("measures live on different ground sets")]
    GroundMismatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MmError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        MmError::InvalidArgument(msg.into())
    }
}
