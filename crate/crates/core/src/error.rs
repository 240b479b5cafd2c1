use thiserror::Error;

/// Errors surfaced by the engine.
///
/// `Precondition` and `InvalidInstance` map to the CLI's validation exit
/// code; everything else is treated as a usage or runtime failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("round {round} outside [1, {horizon}]")]
    RoundOutOfRange { round: usize, horizon: usize },

    #[error("invalid policy: {0}")]
    Policy(String),

    #[error("episode exhausted after {0} rounds")]
    EpisodeExhausted(usize),

    #[error("arm {arm} has no observations")]
    UnpulledArm { arm: usize },

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for failures caused by parameters that do not meet a construction's requirements.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInstance(_) | Error::Precondition(_) | Error::RoundOutOfRange { .. }
        )
    }
}
