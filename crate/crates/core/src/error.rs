use thiserror::Error;

pub type Result<T> = std::result::Result<T, CoreError>;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("calibration needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    /// The Jacobian of the residuals is rank deficient, so `C` and `n`
    /// cannot be separated by the data.
    #[error("degenerate Jacobian: calibration data cannot identify both C and n")]
    DegenerateJacobian,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("malformed input: {0}")]
    Format(String),
}
