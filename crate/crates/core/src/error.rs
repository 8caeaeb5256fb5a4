use thiserror::Error;

/// Failures raised by the calculators, constructions and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are well formed but the statement being mechanized does not apply.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A scale sequence value would exceed the configured cap.
    #[error("scale sequence overflow at index {index}: {detail}")]
    Overflow { index: usize, detail: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
