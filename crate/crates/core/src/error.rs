use thiserror::Error;

pub type Result<T> = std::result::Result<T, MftError>;

#[derive(Debug, Error)]
pub enum MftError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("threshold table does not match detection setup: {0}")]
    ThresholdMismatch(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model specification error: {0}")]
    ModelSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl MftError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        MftError::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        MftError::Domain(msg.into())
    }

    pub(crate) fn insufficient(msg: impl Into<String>) -> Self {
        MftError::InsufficientData(msg.into())
    }
}
