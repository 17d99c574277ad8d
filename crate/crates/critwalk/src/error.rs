use std::fmt;

/// Errors produced by parameter validation, instance validation and fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates its documented constraint.
    InvalidParameter(String),
    /// A materialization request exceeds the oracle size cap.
    SizeCap { requested: usize, cap: usize },
    /// A materialized instance failed its internal consistency checks.
    InvalidInstance(String),
    /// Too few usable rows to fit a tail exponent.
    FitUnderdetermined { usable_rows: usize },
    /// Malformed serialized state.
    BadStateToken(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::SizeCap { requested, cap } => {
                write!(f, "instance size {requested} exceeds oracle cap {cap}")
            }
            Error::InvalidInstance(msg) => write!(f, "invalid instance: {msg}"),
            Error::FitUnderdetermined { usable_rows } => {
                write!(f, "exponent fit needs at least 3 usable rows, got {usable_rows}")
            }
            Error::BadStateToken(msg) => write!(f, "bad state token: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
