//! Simulation harness, file formats and configuration for the
//! shape-respecting estimators in `shapefit-core`.

// Validation guards use `!(a < b)` so NaN fails closed; `a >= b` would not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod io;
pub mod risk;

/// Errors surfaced by the harness and CLI plumbing.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] shapefit_core::Error),
    #[error("parse error in {path} at row {row}: {message}")]
    Parse {
        path: String,
        row: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("usage error: {0}")]
    Usage(String),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Process exit code: 1 usage, 2 parse/input, 3 is reserved for
    /// verification failures and set by the CLI itself.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Core(shapefit_core::Error::Usage(_)) => 1,
            Error::Parse { .. } | Error::Io { .. } | Error::Core(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
