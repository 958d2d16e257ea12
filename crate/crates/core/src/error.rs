use thiserror::Error;

/// Errors surfaced by the engine. Infinite moments are values, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sampling error: {reason} (after {tries} tries)")]
    Sampling { reason: String, tries: u64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("coverage error: {0}")]
    Coverage(String),
    /// Far-ball influence above the configured ceiling.
    #[error("truncation bias: {0}")]
    Truncation(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
