use qre_core::QreError;
use qre_lp::LpError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("point {0:?} lies outside the model box")]
    OutOfDomain(Vec<f64>),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Core(#[from] QreError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;
