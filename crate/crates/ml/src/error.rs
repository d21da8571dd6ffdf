use thiserror::Error;

#[derive(Debug, Error)]
pub enum MlError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("split fraction {fraction} of {n} rows leaves an empty partition")]
    DegenerateSplit { n: usize, fraction: f64 },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("normal equations are rank deficient beyond the jitter tolerance")]
    RankDeficient,
    #[error("no grid point produced a finite validation score")]
    NoFiniteScore,
    #[error("model format version {found}, expected {expected}")]
    VersionMismatch { found: String, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("feature list mismatch: model has {found:?}, expected {expected:?}")]
    SchemaMismatch { expected: Vec<String>, found: Vec<String> },
    #[error(transparent)]
    Ingest(#[from] corrosion_ingest::IngestError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MlError>;
