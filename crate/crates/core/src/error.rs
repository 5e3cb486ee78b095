use thiserror::Error;

use crate::evo::VerificationError;
use crate::llm::ChatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{solver} supports at most {cap} sensor nodes, scenario has {n}")]
    Capacity {
        solver: &'static str,
        cap: usize,
        n: usize,
    },

    #[error("invalid state: {0}")]
    State(String),

    #[error("route rejected: {0}")]
    Verification(#[from] VerificationError),

    #[error(transparent)]
    Chat(#[from] ChatError),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
