use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Degenerate or malformed input (non-finite, non-positive, wrong shape).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// Input is well formed but outside what the operation can handle (singular point, box too small).
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation was aborted: NaN, denominator below threshold, mass at the box edge.
    #[error("numerical abort: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
