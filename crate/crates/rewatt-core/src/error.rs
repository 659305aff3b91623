use thiserror::Error;

/// Errors produced by the library.
#[derive(Error, Debug)]
pub enum Error {
    /// Caller-supplied data violates a precondition (shapes, ranges, ratios).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A rewiring action that the target graph does not admit.
    #[error("rejected action: {0}")]
    RejectedAction(String),

    /// No admissible action exists in the current state.
    #[error("empty action space")]
    EmptyActionSpace,

    /// An episode was driven after it already terminated.
    #[error("protocol violation: {0}")]
    Protocol(String),

    /// A test oracle (e.g. finite differences) hit a non-finite value.
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    /// Mathematically undefined request (e.g. resistance of a disconnected graph).
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed dataset file.
    #[error("parse error in {file} line {line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },

    /// Mutually inconsistent dataset files.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// Bad experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
