use thiserror::Error;

use crate::bpbcorrect::Certificate;

/// Errors raised by the construction and its supporting primitives.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("cannot norm the zero vector")]
    ZeroVector,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid oracle limited to {max} columns, operator has {columns}")]
    Complexity { columns: usize, max: usize },

    #[error("range space is not C-uniformly convex at this scale: delta lower bound {d} <= 0")]
    NotUniformlyConvex { d: f64 },

    #[error("hypothesis not met: ||T f0|| = {value} is not above the gate {gate}")]
    HypothesisNotMet { value: f64, gate: f64 },

    #[error("set {which} is empty; certificate attached for diagnosis")]
    EmptySet {
        which: &'static str,
        certificate: Box<Certificate>,
    },

    #[error("norm oracle did not converge within {sweeps} sweeps")]
    OracleNotConverged { sweeps: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        if err.is_io() {
            return Error::Io(err.into());
        }
        let line = err.line();
        let column = err.column();
        let full = err.to_string();
        let suffix = format!(" at line {line} column {column}");
        let message = full.strip_suffix(&suffix).unwrap_or(&full).to_string();
        Error::Parse {
            line,
            column,
            message,
        }
    }
}
