use thiserror::Error;

#[derive(Debug, Error)]
pub enum FarmError {
    #[error("invalid turbine spec: {0}")]
    InvalidTurbine(String),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("invalid ambient state: {0}")]
    InvalidAmbient(String),
    #[error("invalid calibration: wake expansion k_w = {0} must be positive")]
    NonPositiveExpansion(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("zero inflow velocity at turbine")]
    ZeroVelocity,
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("insufficient history: need {needed} s, have {available} s")]
    InsufficientHistory { needed: f64, available: f64 },
    #[error("statistics: {0}")]
    Statistics(String),
    #[error("lookup table: {0}")]
    Lut(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, FarmError>;
