use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The quadratization radicand went nonpositive; `c0` is too small for
    /// the trajectory being integrated.
    #[error("nonpositive radicand {radicand:e} at phi = {phi} (increase c0)")]
    NonpositiveRadicand { radicand: f64, phi: f64 },

    #[error("conjugate gradient did not converge in {maxit} iterations (relative residual {residual:e})")]
    NoConvergence { maxit: usize, residual: f64 },

    #[error("capacitance system is singular (|det| = {det:e})")]
    SingularCapacitance { det: f64 },

    #[error("invariant violated at step {step}: {what}")]
    InvariantViolation { step: usize, what: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("nonpositive error {value:e} at index {index}")]
    NonpositiveError { index: usize, value: f64 },

    #[error("{path}: format error: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonpositiveRadicand { .. } | Error::InvariantViolation { .. } => 2,
            Error::NoConvergence { .. } | Error::SingularCapacitance { .. } => 3,
            _ => 1,
        }
    }
}
