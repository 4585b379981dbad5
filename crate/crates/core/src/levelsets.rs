//! Upper level sets `{x : ψ(x) ≥ υ}` as explicit polyhedra.
//!
//! In the monotone case the set at level `υ` is `conv{θ̃_1..θ̃_j} + (υ/L)·1 +
//! ℝ^N_+` with `j = κ(υ)`. Without monotonicity the orthant is replaced by
//! the two-sided condition `|Σ θ p − x| ≤ q`, `Σ v̂ p − L q ≥ υ`.

use qre_lp::{solve_lp, LinearProgram, LpStatus};
use serde::{Deserialize, Serialize};

use crate::error::{QreError, Result};
use crate::sample::SortedSample;

/// Slack below which a point counts as a member.
pub const MEMBERSHIP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub level: f64,
    pub level_index: usize,
    /// Translated points `θ̃` of the top `level_index` points.
    pub generators: Vec<Vec<f64>>,
    /// Common shift `υ/L` added to every generator.
    pub shift: f64,
    pub monotone: bool,
    /// For `N = 2`: vertices of the lower-left boundary chain, already
    /// shifted, ordered by increasing first coordinate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<[f64; 2]>>,
}

impl LevelSet {
    /// Boundary polyline with the two recession rays clipped at `upper`:
    /// a vertical ray above the first vertex and a horizontal ray right of
    /// the last.
    pub fn polyline(&self, upper: [f64; 2]) -> Option<Vec<[f64; 2]>> {
        let chain = self.boundary.as_ref()?;
        let first = chain[0];
        let last = chain[chain.len() - 1];
        let mut out = Vec::with_capacity(chain.len() + 2);
        out.push([first[0], upper[1].max(first[1])]);
        out.extend_from_slice(chain);
        out.push([upper[0].max(last[0]), last[1]]);
        Some(out)
    }
}

/// Smallest violation `s` such that `x` is in the level set relaxed by `s`;
/// `x` is a member iff the result is at most [`MEMBERSHIP_TOL`]. Returns
/// `+∞` above the sample maximum.
pub fn levelset_slack(s: &SortedSample, level: f64, x: &[f64]) -> Result<f64> {
    s.check_point(x)?;
    if level > s.max_value() {
        return Ok(f64::INFINITY);
    }
    let j = s.level_index(level)?;
    let n = s.dim();
    let l = s.lipschitz();
    // Columns: p (j), then q (non-monotone only), then the free slack.
    let slack = if s.monotone() { j } else { j + 1 };
    let width = slack + 1;
    let mut cost = vec![0.0; width];
    cost[slack] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    lp.set_free(slack);

    if s.monotone() {
        // Σ θ̃ p + υ/L − x ≤ s  (scaled by L so the slack is in value units)
        for k in 0..n {
            let mut row: Vec<f64> = s.translated()[..j].iter().map(|t| l * t[k]).collect();
            row.push(-1.0);
            lp.add_le(row, l * (x[k] - level / l));
        }
    } else {
        let mut row: Vec<f64> = s.values()[..j].iter().map(|v| -v).collect();
        row.extend([l, -1.0]);
        lp.add_le(row, -level);
        for k in 0..n {
            for sign in [1.0, -1.0] {
                let mut row: Vec<f64> = s.points()[..j].iter().map(|t| sign * t[k]).collect();
                row.extend([-1.0, 0.0]);
                lp.add_le(row, sign * x[k]);
            }
        }
    }
    let mut simplex_row = vec![0.0; width];
    simplex_row[..j].iter_mut().for_each(|v| *v = 1.0);
    lp.add_eq(simplex_row, 1.0);

    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        st => Err(QreError::Internal(format!("membership LP reported {st:?}"))),
    }
}

pub fn levelset_contains(s: &SortedSample, level: f64, x: &[f64]) -> Result<bool> {
    Ok(levelset_slack(s, level, x)? <= MEMBERSHIP_TOL)
}

/// Generator form of the level set, with the boundary chain for `N = 2`.
pub fn levelset_hrep(s: &SortedSample, level: f64) -> Result<LevelSet> {
    if !s.monotone() {
        return Err(QreError::NonMonotoneUnsupported);
    }
    let j = s.level_index(level)?;
    let shift = level / s.lipschitz();
    let generators: Vec<Vec<f64>> = s.translated()[..j].to_vec();
    let boundary = (s.dim() == 2).then(|| {
        let pts: Vec<[f64; 2]> = generators
            .iter()
            .map(|g| [g[0] + shift, g[1] + shift])
            .collect();
        lower_left_chain(&pts)
    });
    Ok(LevelSet {
        level,
        level_index: j,
        generators,
        shift,
        monotone: true,
        boundary,
    })
}

/// Vertices of the boundary of `conv(pts) + ℝ²_+` between its two rays.
fn lower_left_chain(pts: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut sorted = pts.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    // Pareto-minimal points: strictly decreasing second coordinate.
    let mut pareto: Vec<[f64; 2]> = Vec::new();
    for p in sorted {
        if pareto.last().is_none_or(|q| p[1] < q[1]) {
            pareto.push(p);
        }
    }
    // Lower convex hull of the staircase.
    let mut hull: Vec<[f64; 2]> = Vec::new();
    for p in pareto {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::RawSample;

    fn line() -> SortedSample {
        SortedSample::new(RawSample::new(
            vec![vec![2.0], vec![0.0]],
            vec![4.0, 2.0],
            2.0,
            true,
        ))
        .unwrap()
    }

    #[test]
    fn membership_on_a_line() {
        let s = line();
        assert!(levelset_contains(&s, 3.0, &[1.5]).unwrap());
        assert!(!levelset_contains(&s, 3.0, &[1.4]).unwrap());
        assert!(levelset_contains(&s, 2.0, &[0.0]).unwrap());
        assert!(!levelset_contains(&s, 4.1, &[100.0]).unwrap());
    }

    #[test]
    fn single_point_halfspace() {
        let s =
            SortedSample::new(RawSample::new(vec![vec![1.0, 1.0]], vec![2.0], 1.0, true)).unwrap();
        let set = levelset_hrep(&s, 1.0).unwrap();
        assert_eq!(set.level_index, 1);
        assert_eq!(set.generators, vec![vec![-1.0, -1.0]]);
        assert_eq!(set.boundary, Some(vec![[0.0, 0.0]]));
        assert_eq!(
            set.polyline([5.0, 5.0]).unwrap(),
            vec![[0.0, 5.0], [0.0, 0.0], [5.0, 0.0]]
        );
    }

    #[test]
    fn chain_drops_dominated_and_interior_points() {
        let chain = lower_left_chain(&[
            [0.0, 4.0],
            [1.0, 1.0],
            [4.0, 0.0],
            [2.0, 2.5],
            [3.0, 3.0],
            [0.5, 3.5],
        ]);
        assert_eq!(chain, vec![[0.0, 4.0], [1.0, 1.0], [4.0, 0.0]]);
    }

    #[test]
    fn non_monotone_hrep_is_rejected() {
        let s = SortedSample::new(RawSample::new(vec![vec![0.0]], vec![1.0], 1.0, false)).unwrap();
        assert_eq!(
            levelset_hrep(&s, 0.5).unwrap_err(),
            QreError::NonMonotoneUnsupported
        );
        assert!(levelset_contains(&s, 0.5, &[0.4]).unwrap());
        assert!(!levelset_contains(&s, 0.5, &[0.6]).unwrap());
    }
}
