//! Error type shared across the crate.

use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong in the engine, grouped by how the caller
/// should react rather than by where it happened.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration: unknown keys, out-of-range values, invalid
    /// model/schedule composition.
    #[error("config error: {0}")]
    Config(String),

    /// Tensor shapes that do not compose.
    #[error("shape error: {0}")]
    Shape(String),

    /// Arguments outside an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// NaN or infinity where a finite number is required.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Malformed or inconsistent data files.
    #[error("data error: {0}")]
    Data(String),

    /// I/O failure, tagged with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numerical check (gradient check, reduction identity) failed.
    #[error("verification failure: {0}")]
    Verification(String),
}

impl Error {
    /// I/O error carrying the offending path.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
