use thiserror::Error;

/// Errors produced by the game model and the solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("unsupported game: {0}")]
    UnsupportedGame(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
