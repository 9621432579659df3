use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported parameter regime: {0}")]
    UnsupportedRegime(String),

    #[error("method unavailable: {0}")]
    MethodUnavailable(String),

    #[error("composition budget exceeded: {count} compositions (limit {limit})")]
    Budget { count: f64, limit: f64 },

    #[error("branch ambiguity: {0}")]
    BranchAmbiguity(String),

    #[error("non-integrable: {0}")]
    NonIntegrable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
