use qre_bench::BenchError;
use qre_core::QreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, unreadable or malformed input files, invalid data.
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Solver(String),
    /// Standard output was closed by the reader, as in `qre ... | head`.
    #[error("output closed")]
    Closed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Closed => 0,
        }
    }
}

impl From<QreError> for CliError {
    fn from(e: QreError) -> Self {
        let msg = e.to_string();
        match e {
            QreError::InfeasibleDecisionSet | QreError::UnboundedDecisionSet => {
                CliError::Infeasible(msg)
            }
            QreError::Solver(_) | QreError::Internal(_) => CliError::Solver(msg),
            _ => CliError::Usage(msg),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::Core(inner) => inner.into(),
            BenchError::Io(inner) => inner.into(),
            BenchError::Json(inner) => inner.into(),
            BenchError::Lp(_) | BenchError::Pool(_) => CliError::Solver(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::Closed;
        }
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        if e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe) {
            return CliError::Closed;
        }
        CliError::Usage(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
