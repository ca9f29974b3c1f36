use thiserror::Error;

/// Errors raised by the exact laws, simulators and test statistics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates the precondition of the operation.
    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The requested statistic does not exist for this input
    /// (too few bins, empty histogram, zero variance).
    #[error("undefined: {0}")]
    Undefined(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
