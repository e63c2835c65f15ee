use thiserror::Error;

/// Errors raised by the scheduling library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violated its documented invariant. `field` names the
    /// offending parameter, e.g. `LayoutParams.M`.
    #[error("invalid value for {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Active-user channel matrix is (numerically) rank deficient.
    #[error("degenerate channel: singular value ratio {ratio:e} below threshold")]
    DegenerateChannel { ratio: f64 },

    #[error("empirical CDF needs at least one sample")]
    EmptySamples,

    /// Level-crossing probabilities must be nonincreasing in t.
    #[error("level-crossing probabilities increase at t = {index}")]
    NonMonotone { index: usize },

    /// A persisted artifact failed validation.
    #[error("corrupt {what}: invariant `{invariant}` violated")]
    Corrupt { what: String, invariant: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
