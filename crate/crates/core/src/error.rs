use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument outside the domain of the operation.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An adaptive integral did not reach its tolerance.
    #[error("quadrature failed in {integral}: {reason}")]
    Quadrature { integral: String, reason: String },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// Prefix the integral label with the caller's context so nested failures
    /// name the offending sub-integral.
    pub(crate) fn within(self, context: &str) -> Self {
        match self {
            Error::Quadrature { integral, reason } => Error::Quadrature {
                integral: format!("{context} / {integral}"),
                reason,
            },
            other => other,
        }
    }

    /// Process exit status used by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Quadrature { .. } => 3,
            _ => 2,
        }
    }
}

/// Reject non-finite values and values below `min` (inclusive bound).
pub(crate) fn check_at_least(name: &'static str, value: f64, min: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(name, value, "must be finite"));
    }
    if value < min {
        return Err(Error::invalid(
            name,
            value,
            if min == 0.0 {
                "must be non-negative"
            } else {
                "below minimum"
            },
        ));
    }
    Ok(value)
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::invalid(name, value, "must be finite"));
    }
    if value <= 0.0 {
        return Err(Error::invalid(name, value, "must be strictly positive"));
    }
    Ok(value)
}
