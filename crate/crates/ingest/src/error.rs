use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },
    #[error("records must be sorted by (station_id, timestamp); violation at index {0}")]
    Unsorted(usize),
    #[error("feature file line {line}: {msg}")]
    FeatureRow { line: u64, msg: String },
    #[error("empty dataset")]
    Empty,
    #[error(transparent)]
    Model(#[from] corrosion_core::CoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, IngestError>;
