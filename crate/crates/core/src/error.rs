use thiserror::Error;

/// Errors raised by model evaluation, solvers and the experiment harness.
#[derive(Debug, Error)]
pub enum GameError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The inputs are valid but do not satisfy the hypothesis an operation needs.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A checked property of the model failed to hold.
    #[error("property violated: {0}")]
    Violation(String),

    /// A sweep or CLI configuration is malformed.
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl GameError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        GameError::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        GameError::Precondition(msg.into())
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        GameError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors that come from numerical hypotheses rather than from
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            GameError::Domain(_) | GameError::Precondition(_) | GameError::Violation(_)
        )
    }
}

impl From<csv::Error> for GameError {
    fn from(e: csv::Error) -> Self {
        GameError::Serialization(e.to_string())
    }
}

impl From<serde_json::Error> for GameError {
    fn from(e: serde_json::Error) -> Self {
        GameError::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GameError>;
