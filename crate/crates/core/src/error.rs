use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A physical or numerical parameter is outside its admissible range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The requested combination of settings cannot be run.
    #[error("configuration error: {0}")]
    Configuration(String),

    /// Inputs are individually valid but used inconsistently.
    #[error("usage error: {0}")]
    Usage(String),

    /// A run finished but its own diagnostics flag it as unreliable.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("malformed correlator cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}
