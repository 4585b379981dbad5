use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("simplex iteration limit exceeded after {0} iterations")]
    IterationLimit(usize),
    #[error("branch-and-bound node limit of {0} exceeded")]
    NodeLimit(usize),
    #[error("{count} binary variables exceed the configured limit of {limit}")]
    TooManyBinaries { count: usize, limit: usize },
    #[error("numerical failure: {0}")]
    Numerical(String),
}
