use qre_lp::LpError;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QreError {
    #[error("sample has no points")]
    EmptySample,
    #[error("non-finite input: {0}")]
    NonFiniteInput(String),
    #[error("Lipschitz constant must be finite and positive, got {0}")]
    InvalidLipschitz(f64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("level {level} exceeds the sample maximum {max}")]
    LevelAboveMax { level: f64, max: f64 },
    #[error("level index {index} outside 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("big-M {given} is below the validity bound {required}")]
    BigMTooSmall { given: f64, required: f64 },
    #[error("operation requires a monotone sample")]
    NonMonotoneUnsupported,
    #[error("output map must be affine (one piece per component) for non-monotone samples")]
    NonAffineOutputMap,
    #[error("decision set is empty")]
    InfeasibleDecisionSet,
    #[error("decision set is unbounded")]
    UnboundedDecisionSet,
    #[error("group shape {groups}x{size} does not match dimension {dim}")]
    ShapeMismatch {
        groups: usize,
        size: usize,
        dim: usize,
    },
    #[error("{0} groups exceed the enumeration limit")]
    GroupCountTooLarge(usize),
    #[error("invalid target specification: {0}")]
    SpecViolation(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Solver(#[from] LpError),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, QreError>;
