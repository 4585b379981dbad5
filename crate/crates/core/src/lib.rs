//! Quasiconcave Lipschitz envelopes of data samples and robust
//! maximization over them.
//!
//! ```
//! # fn main() -> qre_core::Result<()> {
//! use qre_core::envelope::eval_psi;
//! use qre_core::problem::{Polyhedron, RobustProblem};
//! use qre_core::sample::{RawSample, SortedSample};
//! use qre_core::solver::solve_robust;
//!
//! let raw = RawSample::new(
//!     vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
//!     vec![0.0, 1.0, 1.0, 2.0],
//!     1.0,  // Lipschitz constant
//!     true, // monotone
//! );
//! let sample = SortedSample::new(raw)?;
//! let at = eval_psi(&sample, &[0.5, 0.5])?;
//! assert!(at.value >= 1.0 && at.lp_solves <= qre_core::probe_budget(4));
//!
//! let problem = RobustProblem::identity(Polyhedron::cube(2, 0.0, 1.0))?;
//! let report = solve_robust(&sample, &problem)?;
//! assert!((report.value - 2.0).abs() < 1e-9);
//! # Ok(())
//! # }
//! ```

pub mod aspirational;
pub mod envelope;
mod error;
pub mod level_function;
pub mod levelsets;
pub mod perminv;
pub mod problem;
pub mod sample;
mod search;
pub mod solver;

pub use error::{QreError, Result};
pub use search::probe_budget;
