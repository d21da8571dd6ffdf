use thiserror::Error;

#[derive(Debug, Error)]
pub enum MonitorError {
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("invalid command: {0}")]
    InvalidCommand(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("simulation loop has stopped")]
    Stopped,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MonitorError>;
