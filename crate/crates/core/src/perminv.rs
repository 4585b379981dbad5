//! Valuations invariant under reordering of `M` equal-size groups of
//! coordinates.
//!
//! A point `x ∈ ℝ^N` with `N = M·K` is read as `M` consecutive groups
//! `x(ω_m) = x[m·K .. (m+1)·K]`; `x_k ∈ ℝ^M` collects component `k` of every
//! group. Group permutations are handled through the assignment-problem
//! dual, so no LP grows with `M!`.

use std::time::Instant;

use qre_lp::{solve_lp, LinearProgram, LpStatus};

use crate::envelope::{eval_psi, EnvelopeValue, KinkedMajorant};
use crate::error::{QreError, Result};
use crate::problem::{OutputMap, RobustProblem};
use crate::sample::{RawSample, SortedSample};
use crate::search::search_levels;
use crate::solver::{ProbeRecord, SolveReport};

/// Largest group count accepted by the enumeration oracle.
pub const MAX_ORACLE_GROUPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupShape {
    pub groups: usize,
    pub size: usize,
}

impl GroupShape {
    pub fn new(groups: usize, size: usize) -> Self {
        Self { groups, size }
    }

    pub fn dim(&self) -> usize {
        self.groups * self.size
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.groups == 0 || self.size == 0 || self.dim() != dim {
            return Err(QreError::ShapeMismatch {
                groups: self.groups,
                size: self.size,
                dim,
            });
        }
        Ok(())
    }

    /// Flat index of component `k` of group `m`.
    pub fn index(&self, m: usize, k: usize) -> usize {
        m * self.size + k
    }

    pub fn group<'a>(&self, x: &'a [f64], m: usize) -> &'a [f64] {
        &x[m * self.size..(m + 1) * self.size]
    }

    /// `x_k`: component `k` across all groups.
    pub fn component(&self, x: &[f64], k: usize) -> Vec<f64> {
        (0..self.groups).map(|m| x[self.index(m, k)]).collect()
    }

    /// Point whose group `m` is group `sigma[m]` of `x`.
    pub fn permute(&self, x: &[f64], sigma: &[usize]) -> Vec<f64> {
        sigma
            .iter()
            .flat_map(|&src| self.group(x, src).iter().copied())
            .collect()
    }
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
            break;
        };
        let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).unwrap_or(i);
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

/// `C[m][l] = Σ_k θ_k[m]·ξ_k[l]`: the cost of sending group `m` of `theta`
/// to slot `l`.
fn assignment_costs(shape: &GroupShape, xi: &[f64], theta: &[f64]) -> Vec<Vec<f64>> {
    (0..shape.groups)
        .map(|m| {
            (0..shape.groups)
                .map(|l| {
                    (0..shape.size)
                        .map(|k| theta[shape.index(m, k)] * xi[shape.index(l, k)])
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// `min_σ ⟨ξ, σ(θ)⟩` by explicit enumeration of group permutations.
pub fn min_over_permutations(shape: &GroupShape, xi: &[f64], theta: &[f64]) -> f64 {
    permutations(shape.groups)
        .iter()
        .map(|sigma| {
            xi.iter()
                .zip(shape.permute(theta, sigma))
                .map(|(a, b)| a * b)
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

/// The same minimum from the doubly-stochastic relaxation of the
/// assignment problem.
pub fn assignment_relaxation(shape: &GroupShape, xi: &[f64], theta: &[f64]) -> Result<f64> {
    let m = shape.groups;
    let c = assignment_costs(shape, xi, theta);
    let mut lp = LinearProgram::minimize(c.iter().flatten().copied().collect());
    for r in 0..m {
        lp.add_eq_sparse(&(0..m).map(|l| (r * m + l, 1.0)).collect::<Vec<_>>(), 1.0);
        lp.add_eq_sparse(&(0..m).map(|l| (l * m + r, 1.0)).collect::<Vec<_>>(), 1.0);
    }
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        st => Err(QreError::Internal(format!("assignment LP reported {st:?}"))),
    }
}

/// Smallest permutation-invariant affine majorant of the top-`j` points at
/// `x`:
///
/// ```text
/// min υ  s.t.  Σ y(θ) + Σ w(θ) − ⟨ξ, x⟩ + υ ≥ v̂(θ)
///              y_m(θ) + w_l(θ) ≤ Σ_k θ_k[m]·ξ_k[l]     for all m, l
///              ξ ≥ 0,  ‖ξ‖₁ ≤ L
/// ```
///
/// The pair `(y, w)` is the assignment dual certifying
/// `min_σ ⟨ξ, σ(θ)⟩ ≥ Σ y + Σ w`.
pub fn solve_plp_perm(
    s: &SortedSample,
    shape: &GroupShape,
    x: &[f64],
    j: usize,
) -> Result<(f64, Vec<f64>)> {
    s.check_index(j)?;
    let n = s.dim();
    let gm = shape.groups;
    let width = 1 + n + j * 2 * gm;
    let mut cost = vec![0.0; width];
    cost[0] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    lp.set_free(0);
    for i in 0..j {
        let base = 1 + n + i * 2 * gm;
        for v in base..base + 2 * gm {
            lp.set_free(v);
        }
        let theta = &s.points()[i];
        let mut terms: Vec<(usize, f64)> = (base..base + 2 * gm).map(|v| (v, 1.0)).collect();
        terms.extend(x.iter().enumerate().map(|(k, &xv)| (1 + k, -xv)));
        terms.push((0, 1.0));
        lp.add_ge_sparse(&terms, s.values()[i]);
        for m in 0..gm {
            for l in 0..gm {
                let mut terms = vec![(base + m, 1.0), (base + gm + l, 1.0)];
                terms.extend(
                    (0..shape.size).map(|k| (1 + shape.index(l, k), -theta[shape.index(m, k)])),
                );
                lp.add_le_sparse(&terms, 0.0);
            }
        }
    }
    lp.add_le_sparse(
        &(1..=n).map(|k| (k, 1.0)).collect::<Vec<_>>(),
        s.lipschitz(),
    );
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, sol.x[1..=n].to_vec())),
        st => Err(QreError::Internal(format!(
            "permutation majorant LP reported {st:?}"
        ))),
    }
}

fn check_inputs(s: &SortedSample, shape: &GroupShape) -> Result<()> {
    if !s.monotone() {
        return Err(QreError::NonMonotoneUnsupported);
    }
    shape.check(s.dim())
}

/// Permutation-invariant worst-case valuation by binary search over level
/// indices.
pub fn eval_psi_perm(s: &SortedSample, shape: &GroupShape, x: &[f64]) -> Result<EnvelopeValue> {
    check_inputs(s, shape)?;
    s.check_point(x)?;
    let res = search_levels(s.values(), true, |j| solve_plp_perm(s, shape, x, j))?;
    Ok(EnvelopeValue {
        value: res.value,
        level_index: res.index,
        witness: KinkedMajorant {
            anchor: x.to_vec(),
            value: res.value,
            slope: res.payload,
        },
        lp_solves: res.probes.len(),
    })
}

/// Sample extended by every group permutation of every point.
pub fn augmented_sample(s: &SortedSample, shape: &GroupShape) -> Result<SortedSample> {
    shape.check(s.dim())?;
    if shape.groups > MAX_ORACLE_GROUPS {
        return Err(QreError::GroupCountTooLarge(shape.groups));
    }
    let perms = permutations(shape.groups);
    let mut points = Vec::with_capacity(s.len() * perms.len());
    let mut values = Vec::with_capacity(points.capacity());
    for (theta, &v) in s.points().iter().zip(s.values()) {
        for sigma in &perms {
            let p = shape.permute(theta, sigma);
            if !points.iter().zip(&values).any(|(q, w)| *q == p && *w == v) {
                points.push(p);
                values.push(v);
            }
        }
    }
    SortedSample::new(RawSample::new(points, values, s.lipschitz(), s.monotone()))
}

/// Reference value: the plain envelope of the augmented sample.
pub fn perm_oracle(s: &SortedSample, shape: &GroupShape, x: &[f64]) -> Result<f64> {
    Ok(eval_psi(&augmented_sample(s, shape)?, x)?.value)
}

/// Highest level reachable with the top-`j` points under permutation
/// invariance:
///
/// ```text
/// max υ  s.t.  Σ v̂ p − L q ≥ υ
///              Σ_θ ρ_θᵀ θ_k − G_k(z) ≤ q·1        for every component k
///              ρ_θ 1 = p_θ 1,  1ᵀ ρ_θ = p_θ 1ᵀ,  ρ_θ ≥ 0
///              Σ p = 1,  p, q ≥ 0,  z ∈ Z
/// ```
pub fn solve_gdj_perm(
    s: &SortedSample,
    shape: &GroupShape,
    rp: &RobustProblem,
    j: usize,
) -> Result<(f64, Vec<f64>)> {
    check_inputs(s, shape)?;
    s.check_index(j)?;
    if rp.output_dim() != s.dim() {
        return Err(QreError::DimensionMismatch(format!(
            "output map has dimension {}, sample has {}",
            rp.output_dim(),
            s.dim()
        )));
    }
    let t = rp.decision_dim();
    let n = s.dim();
    let gm = shape.groups;
    let l = s.lipschitz();
    let (tv, upsilon) = match rp.output {
        OutputMap::Identity => (0, t),
        OutputMap::Components(_) => (t, t + n),
    };
    let q = upsilon + 1;
    let p0 = q + 1;
    let rho0 = p0 + j;
    let rho = |i: usize, m: usize, c: usize| rho0 + i * gm * gm + m * gm + c;
    let width = rho0 + j * gm * gm;

    let mut cost = vec![0.0; width];
    cost[upsilon] = 1.0;
    let mut lp = LinearProgram::maximize(cost);
    rp.domain.constrain(&mut lp, 0);
    lp.set_free(upsilon);
    if let OutputMap::Components(comps) = &rp.output {
        for (k, comp) in comps.iter().enumerate() {
            lp.set_free(tv + k);
            for piece in &comp.pieces {
                let mut terms: Vec<(usize, f64)> =
                    piece.a.iter().enumerate().map(|(c, &a)| (c, -a)).collect();
                terms.push((tv + k, 1.0));
                lp.add_le_sparse(&terms, piece.beta);
            }
        }
    }

    let mut value_row: Vec<(usize, f64)> = s.values()[..j]
        .iter()
        .enumerate()
        .map(|(i, &v)| (p0 + i, -v))
        .collect();
    value_row.push((upsilon, 1.0));
    value_row.push((q, l));
    lp.add_le_sparse(&value_row, 0.0);

    for k in 0..shape.size {
        for slot in 0..gm {
            let mut terms = Vec::with_capacity(j * gm + 2);
            for (i, theta) in s.points()[..j].iter().enumerate() {
                for m in 0..gm {
                    terms.push((rho(i, m, slot), theta[shape.index(m, k)]));
                }
            }
            terms.push((tv + shape.index(slot, k), -1.0));
            terms.push((q, -1.0));
            lp.add_le_sparse(&terms, 0.0);
        }
    }
    for i in 0..j {
        for r in 0..gm {
            let mut row: Vec<(usize, f64)> = (0..gm).map(|c| (rho(i, r, c), 1.0)).collect();
            row.push((p0 + i, -1.0));
            lp.add_eq_sparse(&row, 0.0);
            let mut col: Vec<(usize, f64)> = (0..gm).map(|c| (rho(i, c, r), 1.0)).collect();
            col.push((p0 + i, -1.0));
            lp.add_eq_sparse(&col, 0.0);
        }
    }
    lp.add_eq_sparse(&(p0..p0 + j).map(|i| (i, 1.0)).collect::<Vec<_>>(), 1.0);

    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, sol.x[..t].to_vec())),
        LpStatus::Infeasible => Err(QreError::InfeasibleDecisionSet),
        LpStatus::Unbounded => Err(QreError::UnboundedDecisionSet),
    }
}

/// Binary search for `max_{z ∈ Z} ψ†(G(z))`, mirroring
/// [`solve_robust`](crate::solver::solve_robust).
pub fn solve_robust_perm(
    s: &SortedSample,
    shape: &GroupShape,
    rp: &RobustProblem,
) -> Result<SolveReport> {
    let start = Instant::now();
    check_inputs(s, shape)?;
    let res = search_levels(s.values(), false, |j| solve_gdj_perm(s, shape, rp, j))?;
    let z = res.payload;
    let check = eval_psi_perm(s, shape, &rp.apply(&z))?.value;
    Ok(SolveReport {
        method: "binary-perm".into(),
        value: res.value,
        level_index: res.index,
        lp_solves: res.probes.len(),
        milp_solves: 0,
        iterations: res.probes.len(),
        converged: true,
        probes: res
            .probes
            .into_iter()
            .map(|(j, value)| ProbeRecord { j, value })
            .collect(),
        z,
        check_value: Some(check),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::Polyhedron;
    use approx::assert_abs_diff_eq;

    fn swap_sample() -> SortedSample {
        SortedSample::new(RawSample::new(vec![vec![0.0, 2.0]], vec![1.0], 1.0, true)).unwrap()
    }

    #[test]
    fn lexicographic_permutations() {
        assert_eq!(permutations(1), vec![vec![0]]);
        assert_eq!(
            permutations(3),
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }

    #[test]
    fn group_slicing() {
        let shape = GroupShape::new(3, 2);
        let x = [0.0, 1.0, 10.0, 11.0, 20.0, 21.0];
        assert_eq!(shape.group(&x, 1), &[10.0, 11.0]);
        assert_eq!(shape.component(&x, 1), vec![1.0, 11.0, 21.0]);
        assert_eq!(
            shape.permute(&x, &[2, 0, 1]),
            vec![20.0, 21.0, 0.0, 1.0, 10.0, 11.0]
        );
    }

    #[test]
    fn swapped_point_is_as_good() {
        let s = swap_sample();
        let shape = GroupShape::new(2, 1);
        assert_abs_diff_eq!(
            eval_psi_perm(&s, &shape, &[2.0, 0.0]).unwrap().value,
            1.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            eval_psi_perm(&s, &shape, &[0.0, 2.0]).unwrap().value,
            1.0,
            epsilon = 1e-9
        );
        // (1,1) is the midpoint of (0,2) and (2,0), so the origin reaches 1 − 1 = 0
        assert_abs_diff_eq!(
            eval_psi_perm(&s, &shape, &[0.0, 0.0]).unwrap().value,
            0.0,
            epsilon = 1e-9
        );
        let both = SortedSample::new(RawSample::new(
            vec![vec![0.0, 2.0], vec![2.0, 0.0]],
            vec![1.0, 1.0],
            1.0,
            true,
        ))
        .unwrap();
        assert_abs_diff_eq!(
            eval_psi(&both, &[0.0, 0.0]).unwrap().value,
            0.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            perm_oracle(&s, &shape, &[2.0, 0.0]).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn shape_errors() {
        let s = swap_sample();
        let bad = GroupShape::new(3, 1);
        assert!(matches!(
            eval_psi_perm(&s, &bad, &[0.0, 0.0]),
            Err(QreError::ShapeMismatch { .. })
        ));
        let wide =
            SortedSample::new(RawSample::new(vec![vec![0.0; 6]], vec![1.0], 1.0, true)).unwrap();
        assert_eq!(
            perm_oracle(&wide, &GroupShape::new(6, 1), &[0.0; 6]).unwrap_err(),
            QreError::GroupCountTooLarge(6)
        );
    }

    #[test]
    fn robust_solve_on_square() {
        let s = swap_sample();
        let rp = RobustProblem::identity(Polyhedron::cube(2, 0.0, 2.0)).unwrap();
        let rep = solve_robust_perm(&s, &GroupShape::new(2, 1), &rp).unwrap();
        assert_abs_diff_eq!(rep.value, 1.0, epsilon = 1e-9);
    }
}
