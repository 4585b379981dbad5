//! Dense linear programming for desk-scale models.
//!
//! [`solve_lp`] is a bounded-variable primal simplex over a dense tableau and
//! [`solve_milp`] wraps it in best-first branch-and-bound for programs with a
//! handful of `{0,1}` variables. Both are deterministic: the same input always
//! yields the same pivots, nodes and output.

mod error;
mod milp;
mod problem;
mod simplex;

pub use error::LpError;
pub use milp::{solve_milp, solve_milp_with, MilpOptions, MixedBinaryProgram};
pub use problem::{LinearProgram, LpOptions, LpSolution, LpStatus, Sense};
pub use simplex::{solve_lp, solve_lp_with};
