use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("cannot parse weight model at position {position}: {reason}")]
    WeightSpec { position: usize, reason: String },

    #[error("moment order {0} unsupported (expected 1..=4)")]
    UnsupportedMoment(u32),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{what}: size {size} exceeds the configured cap {cap}; {advice}")]
    SizeGuard { what: &'static str, size: u128, cap: u128, advice: &'static str },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("config line {line}, field `{field}`: {reason}")]
    Config { line: usize, field: String, reason: String },

    #[error("malformed instance dump at line {line}: {reason}")]
    Dump { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}
