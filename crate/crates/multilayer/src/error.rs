use thiserror::Error;

/// Errors surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Structural or parameter validation failure.
    #[error("validation error: {0}")]
    Validation(String),
    /// An exact-enumeration routine was asked for an instance above its size cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),
    /// Malformed input text (graph, parameter, scaling or configuration files).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
