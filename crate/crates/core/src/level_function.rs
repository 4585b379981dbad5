//! Level function method: cutting planes built from the slopes of kinked
//! majorants, one mixed-binary solve per iteration.

use std::time::Instant;

use qre_lp::{solve_lp, LinearProgram, LpStatus};

use crate::envelope::{default_big_m, eval_psi, solve_pmilp};
use crate::error::{QreError, Result};
use crate::problem::Polyhedron;
use crate::sample::SortedSample;
use crate::solver::SolveReport;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunctionOptions {
    pub eps: f64,
    pub max_iter: usize,
}

impl Default for LevelFunctionOptions {
    fn default() -> Self {
        Self {
            eps: 1e-6,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunctionState {
    pub iterates: Vec<Vec<f64>>,
    pub slopes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    /// `Δ(i)`: the maximum of the current level function over the domain.
    pub gaps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunctionResult {
    /// Best evaluated iterate and its value.
    pub x: Vec<f64>,
    pub value: f64,
    /// Maximizer of the final level function (not evaluated).
    pub last_iterate: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub state: LevelFunctionState,
    pub wall_time_s: f64,
}

impl LevelFunctionResult {
    pub fn to_report(&self, check_value: Option<f64>) -> SolveReport {
        SolveReport {
            method: "level-function".into(),
            z: self.x.clone(),
            value: self.value,
            level_index: 0,
            probes: Vec::new(),
            lp_solves: 0,
            milp_solves: self.iterations,
            iterations: self.iterations,
            converged: self.converged,
            check_value,
            wall_time_s: self.wall_time_s,
        }
    }
}

/// Maximizes `ψ` over `domain` (identity output map).
///
/// Starting from the Chebyshev center, each iteration solves the
/// disjunctive program at `x_i` for the value and slope `ξ_i`, adds the cut
/// `σ_i(x) = ⟨ξ_i, x − x_i⟩` and moves to the maximizer of `min_l σ_l` over
/// the domain. Stops once that maximum `Δ` is at most `eps`; no point of the
/// domain can then beat the best iterate by more than the cut tolerance, so
/// the best evaluated iterate is returned. Hitting `max_iter` returns the
/// best so far with `converged = false`.
pub fn solve_level_function(
    s: &SortedSample,
    domain: &Polyhedron,
    opts: &LevelFunctionOptions,
) -> Result<LevelFunctionResult> {
    let start = Instant::now();
    if domain.dim() != s.dim() {
        return Err(QreError::DimensionMismatch(format!(
            "domain has dimension {}, sample has {}",
            domain.dim(),
            s.dim()
        )));
    }
    let n = s.dim();
    let mut x = domain.chebyshev_center()?;
    let mut state = LevelFunctionState {
        iterates: Vec::new(),
        slopes: Vec::new(),
        values: Vec::new(),
        gaps: Vec::new(),
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut converged = false;

    while state.iterates.len() < opts.max_iter {
        let m = solve_pmilp(s, &x, default_big_m(s, &x))?;
        if best.as_ref().is_none_or(|(_, v)| m.value > *v) {
            best = Some((x.clone(), m.value));
        }
        state.iterates.push(x.clone());
        state.slopes.push(m.slope);
        state.values.push(m.value);

        // max t  s.t.  t ≤ ⟨ξ_l, x − x_l⟩ for every recorded l, x ∈ domain
        let mut cost = vec![0.0; n + 1];
        cost[n] = 1.0;
        let mut lp = LinearProgram::maximize(cost);
        domain.constrain(&mut lp, 0);
        lp.set_free(n);
        for (xi, xl) in state.slopes.iter().zip(&state.iterates) {
            let mut terms: Vec<(usize, f64)> =
                xi.iter().enumerate().map(|(k, &v)| (k, -v)).collect();
            terms.push((n, 1.0));
            let rhs = -xi.iter().zip(xl).map(|(a, b)| a * b).sum::<f64>();
            lp.add_le_sparse(&terms, rhs);
        }
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(QreError::Internal(format!(
                "level function LP reported {:?}",
                sol.status
            )));
        }
        state.gaps.push(sol.value);
        x = sol.x[..n].to_vec();
        if sol.value <= opts.eps {
            converged = true;
            break;
        }
    }

    let (bx, bv) =
        best.ok_or_else(|| QreError::Internal("level function ran zero iterations".into()))?;
    Ok(LevelFunctionResult {
        x: bx,
        value: bv,
        last_iterate: x,
        iterations: state.iterates.len(),
        converged,
        state,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs the method and packages a [`SolveReport`], re-evaluating `ψ` at the
/// returned point.
pub fn solve_level_function_report(
    s: &SortedSample,
    domain: &Polyhedron,
    opts: &LevelFunctionOptions,
) -> Result<SolveReport> {
    let res = solve_level_function(s, domain, opts)?;
    let check = eval_psi(s, &res.x)?.value;
    Ok(res.to_report(Some(check)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::RawSample;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_point_plateau() {
        let s =
            SortedSample::new(RawSample::new(vec![vec![1.0, 2.0]], vec![3.0], 1.0, true)).unwrap();
        let res =
            solve_level_function(&s, &Polyhedron::cube(2, 0.0, 4.0), &Default::default()).unwrap();
        assert!(res.converged);
        assert_abs_diff_eq!(res.value, 3.0, epsilon = 1e-6);
    }

    #[test]
    fn infinite_tolerance_stops_after_one_solve() {
        let s =
            SortedSample::new(RawSample::new(vec![vec![1.0, 2.0]], vec![3.0], 1.0, true)).unwrap();
        let opts = LevelFunctionOptions {
            eps: f64::INFINITY,
            max_iter: 10,
        };
        let res = solve_level_function(&s, &Polyhedron::cube(2, 0.0, 4.0), &opts).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.x, vec![2.0, 2.0]);
    }

    #[test]
    fn matches_binary_search_on_a_line() {
        let s = SortedSample::new(RawSample::new(
            vec![vec![2.0], vec![0.0]],
            vec![4.0, 2.0],
            2.0,
            true,
        ))
        .unwrap();
        let res =
            solve_level_function(&s, &Polyhedron::cube(1, 0.0, 1.0), &Default::default()).unwrap();
        assert_abs_diff_eq!(res.value, 2.0, epsilon = 1e-6);
    }
}
