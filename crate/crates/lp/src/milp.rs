use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::problem::{LinearProgram, LpOptions, LpSolution, LpStatus, Sense};
use crate::simplex::solve_with_bounds;
use crate::LpError;

/// A linear program in which some variables are restricted to `{0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedBinaryProgram {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MixedBinaryProgram {
    /// Wraps `lp`, clamping the bounds of every listed binary to `[0, 1]`.
    pub fn new(mut lp: LinearProgram, binaries: Vec<usize>) -> Self {
        for &j in &binaries {
            if j < lp.num_vars() {
                lp.lower[j] = lp.lower[j].max(0.0);
                lp.upper[j] = lp.upper[j].min(1.0);
            }
        }
        Self { lp, binaries }
    }

    pub fn validate(&self) -> Result<(), LpError> {
        self.lp.validate()?;
        let n = self.lp.num_vars();
        for &j in &self.binaries {
            if j >= n {
                return Err(LpError::MalformedProgram(format!(
                    "binary index {j} out of range for {n} variables"
                )));
            }
            if self.lp.lower[j] < 0.0 || self.lp.upper[j] > 1.0 {
                return Err(LpError::MalformedProgram(format!(
                    "binary variable {j} has bounds outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpOptions {
    pub lp: LpOptions,
    pub integrality_tol: f64,
    pub max_binaries: usize,
    pub node_limit: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            lp: LpOptions::default(),
            integrality_tol: 1e-6,
            max_binaries: 64,
            node_limit: 1_000_000,
        }
    }
}

pub fn solve_milp(mbp: &MixedBinaryProgram) -> Result<LpSolution, LpError> {
    solve_milp_with(mbp, &MilpOptions::default())
}

struct Node {
    bound: f64,
    seq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: the smallest bound, then the oldest node, wins.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Best-first branch-and-bound on LP relaxations.
///
/// Nodes are expanded in order of their relaxation bound (ties by creation
/// order), branching on the most fractional binary with the lowest index
/// breaking ties. A node is pruned once its bound cannot beat the incumbent
/// by more than a relative `1e-9`, so the returned value is exact up to that
/// tolerance.
pub fn solve_milp_with(
    mbp: &MixedBinaryProgram,
    opts: &MilpOptions,
) -> Result<LpSolution, LpError> {
    mbp.validate()?;
    if mbp.binaries.len() > opts.max_binaries {
        return Err(LpError::TooManyBinaries {
            count: mbp.binaries.len(),
            limit: opts.max_binaries,
        });
    }
    let lp = &mbp.lp;
    let n = lp.num_vars();
    // Internal bookkeeping is in minimisation form.
    let flip = if lp.sense == Sense::Maximize {
        -1.0
    } else {
        1.0
    };

    let mut iterations = 0usize;
    let mut nodes = 0usize;
    let mut seq = 0usize;
    let mut incumbent: Option<(f64, LpSolution)> = None;
    let mut saw_unbounded = false;

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        seq,
        lower: lp.lower.clone(),
        upper: lp.upper.clone(),
    });

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if !improves(node.bound, *best) {
                break;
            }
        }
        nodes += 1;
        if nodes > opts.node_limit {
            return Err(LpError::NodeLimit(opts.node_limit));
        }

        let sol = solve_with_bounds(lp, &node.lower, &node.upper, &opts.lp)?;
        iterations += sol.iterations;
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                saw_unbounded = true;
                if mbp.binaries.is_empty() || nodes == 1 {
                    break;
                }
                continue;
            }
            LpStatus::Optimal => {}
        }
        let bound = flip * sol.value;
        if let Some((best, _)) = &incumbent {
            if !improves(bound, *best) {
                continue;
            }
        }

        let Some(branch) = most_fractional(&mbp.binaries, &sol.x, opts.integrality_tol) else {
            let mut sol = sol;
            for &j in &mbp.binaries {
                sol.x[j] = sol.x[j].round();
            }
            incumbent = Some((bound, sol));
            continue;
        };

        if nodes == 1 {
            if let Some((v, s)) =
                rounding_heuristic(mbp, &sol.x, &node, &opts.lp, flip, &mut iterations)?
            {
                incumbent = Some((v, s));
            }
        }

        for fix in [0.0, 1.0] {
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            lower[branch] = fix;
            upper[branch] = fix;
            seq += 1;
            heap.push(Node {
                bound,
                seq,
                lower,
                upper,
            });
        }
    }

    match incumbent {
        Some((_, mut sol)) => {
            sol.iterations = iterations;
            sol.nodes = nodes;
            Ok(sol)
        }
        None => {
            let status = if saw_unbounded {
                LpStatus::Unbounded
            } else {
                LpStatus::Infeasible
            };
            let mut sol = LpSolution::non_optimal(status, n, iterations);
            sol.nodes = nodes;
            Ok(sol)
        }
    }
}

fn improves(bound: f64, incumbent: f64) -> bool {
    bound < incumbent - 1e-9 * (1.0 + incumbent.abs())
}

fn most_fractional(binaries: &[usize], x: &[f64], tol: f64) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut best_frac = tol;
    for &j in binaries {
        let frac = (x[j] - x[j].round()).abs();
        if frac > best_frac || (frac == best_frac && best.is_some_and(|b| j < b)) {
            best_frac = frac;
            best = Some(j);
        }
    }
    best
}

/// Fix every binary at its rounded root value and re-solve; a cheap first
/// incumbent for the pruning test.
fn rounding_heuristic(
    mbp: &MixedBinaryProgram,
    x: &[f64],
    node: &Node,
    opts: &LpOptions,
    flip: f64,
    iterations: &mut usize,
) -> Result<Option<(f64, LpSolution)>, LpError> {
    let mut lower = node.lower.clone();
    let mut upper = node.upper.clone();
    for &j in &mbp.binaries {
        let r = x[j].round().clamp(lower[j], upper[j]);
        lower[j] = r;
        upper[j] = r;
    }
    let sol = solve_with_bounds(&mbp.lp, &lower, &upper, opts)?;
    *iterations += sol.iterations;
    Ok(sol.is_optimal().then_some((flip * sol.value, sol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn either_branch() {
        // min y s.t. y >= 1 - u, y >= u
        let mut lp = LinearProgram::minimize(vec![1.0, 0.0]);
        lp.add_ge(vec![1.0, 1.0], 1.0);
        lp.add_ge(vec![1.0, -1.0], 0.0);
        let sol = solve_milp(&MixedBinaryProgram::new(lp, vec![1])).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert_abs_diff_eq!(sol.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn knapsack() {
        let mut lp = LinearProgram::maximize(vec![3.0, 2.0]);
        lp.add_le(vec![1.0, 1.0], 1.0);
        let sol = solve_milp(&MixedBinaryProgram::new(lp, vec![0, 1])).unwrap();
        assert_abs_diff_eq!(sol.value, 3.0, epsilon = 1e-9);
        assert_eq!(sol.x, vec![1.0, 0.0]);
    }

    #[test]
    fn fractional_relaxation_needs_branching() {
        // max 5a + 4b + 3c s.t. 2a + 3b + c <= 5, 4a + b + 2c <= 11, 3a + 4b + 2c <= 8
        let mut lp = LinearProgram::maximize(vec![5.0, 4.0, 3.0]);
        lp.add_le(vec![2.0, 3.0, 1.0], 5.0);
        lp.add_le(vec![4.0, 1.0, 2.0], 11.0);
        lp.add_le(vec![3.0, 4.0, 2.0], 8.0);
        let sol = solve_milp(&MixedBinaryProgram::new(lp, vec![0, 1, 2])).unwrap();
        assert_abs_diff_eq!(sol.value, 9.0, epsilon = 1e-9);
    }

    #[test]
    fn binary_limit() {
        let lp = LinearProgram::minimize(vec![0.0; 3]);
        let opts = MilpOptions {
            max_binaries: 2,
            ..Default::default()
        };
        let err = solve_milp_with(&MixedBinaryProgram::new(lp, vec![0, 1, 2]), &opts).unwrap_err();
        assert_eq!(err, LpError::TooManyBinaries { count: 3, limit: 2 });
    }

    #[test]
    fn infeasible_after_branching() {
        // u1 + u2 = 1.5 has a relaxed solution but no binary one.
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.add_eq(vec![1.0, 1.0], 1.5);
        let sol = solve_milp(&MixedBinaryProgram::new(lp, vec![0, 1])).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }
}
