use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell index ({i}, {j}) outside a {nx}x{ny} grid")]
    IndexOutOfRange { i: usize, j: usize, nx: usize, ny: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("set has no cells")]
    EmptySet,

    #[error("mask is all-true or all-false, so its boundary is empty")]
    DegenerateBoundary,

    #[error("grid domains differ: {0}")]
    DomainMismatch(String),

    #[error("sample stack is empty")]
    EmptyStack,

    #[error("sample stack has {got} fields, need at least {need}")]
    StackTooSmall { got: usize, need: usize },

    #[error("window mask has no cells")]
    EmptyWindow,

    #[error("field {index} breaks the 1-Lipschitz bound by {excess:e}")]
    NotLipschitz { index: usize, excess: f64 },

    #[error("model `{0}` does not support this operation")]
    UnsupportedModel(String),

    #[error("model `{kind}` needs a {want} grid")]
    UnsupportedDomain { kind: String, want: &'static str },

    #[error("design matrix is rank deficient")]
    RankDeficient,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("feature map undefined at ({x}, {y}): {reason}")]
    DomainViolation { x: f64, y: f64, reason: String },

    #[error("covariance matrix is not positive semi-definite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), message: message.into() }
    }
}
