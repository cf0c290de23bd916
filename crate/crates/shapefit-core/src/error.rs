use alloc::string::String;
use core::fmt;

/// Error type shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A construction invariant or domain precondition failed.
    Domain(String),
    /// The operation does not apply to the given combination of inputs.
    Usage(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
