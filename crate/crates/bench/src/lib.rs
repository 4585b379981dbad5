//! Cobb-Douglas benchmark for the quasiconcave envelope: ground truth,
//! baselines, optimality-gap and L1 studies, runtime counts and contour
//! exports.

pub mod baselines;
pub mod cobb;
pub mod contour;
mod error;
pub mod experiment;
pub mod output;
pub mod report;

pub use error::{BenchError, Result};
