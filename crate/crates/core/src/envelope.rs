//! Worst-case valuation `ψ(x)`: the smallest L-Lipschitz quasiconcave
//! (optionally monotone) function lying above every sample value.

use qre_lp::{solve_lp, solve_milp, LinearProgram, LpStatus, MixedBinaryProgram};
use serde::{Deserialize, Serialize};

use crate::error::{QreError, Result};
use crate::sample::SortedSample;
use crate::search::search_levels;

/// `h(y) = value + max(⟨slope, y − anchor⟩, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinkedMajorant {
    pub anchor: Vec<f64>,
    pub value: f64,
    pub slope: Vec<f64>,
}

impl KinkedMajorant {
    pub fn eval(&self, y: &[f64]) -> f64 {
        let d: f64 = self
            .slope
            .iter()
            .zip(y)
            .zip(&self.anchor)
            .map(|((s, y), a)| s * (y - a))
            .sum();
        self.value + d.max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeValue {
    pub value: f64,
    /// Level index at which the search terminated.
    pub level_index: usize,
    /// Slope taken from the affine majorant LP at `level_index`.
    pub witness: KinkedMajorant,
    pub lp_solves: usize,
}

/// Slope columns: `ξ ≥ 0` in monotone mode, `ξ = ξ⁺ − ξ⁻` otherwise.
fn slope_width(s: &SortedSample) -> usize {
    if s.monotone() {
        s.dim()
    } else {
        2 * s.dim()
    }
}

fn slope_terms(s: &SortedSample, offset: usize, direction: &[f64]) -> Vec<(usize, f64)> {
    let n = s.dim();
    let mut terms: Vec<(usize, f64)> = direction
        .iter()
        .enumerate()
        .map(|(k, &d)| (offset + k, d))
        .collect();
    if !s.monotone() {
        terms.extend(
            direction
                .iter()
                .enumerate()
                .map(|(k, &d)| (offset + n + k, -d)),
        );
    }
    terms
}

fn read_slope(s: &SortedSample, offset: usize, x: &[f64]) -> Vec<f64> {
    let n = s.dim();
    (0..n)
        .map(|k| {
            if s.monotone() {
                x[offset + k]
            } else {
                x[offset + k] - x[offset + n + k]
            }
        })
        .collect()
}

/// Smallest L-Lipschitz affine majorant of the top-`j` points, evaluated at
/// `x`:
///
/// ```text
/// min υ  s.t.  υ + ⟨ξ, θ − x⟩ ≥ v̂(θ)  for θ in the top j,  ‖ξ‖₁ ≤ L
/// ```
///
/// with `ξ ≥ 0` when the sample is monotone. Returns the value and slope.
pub fn solve_plp(s: &SortedSample, x: &[f64], j: usize) -> Result<(f64, Vec<f64>)> {
    s.check_index(j)?;
    s.check_point(x)?;
    let w = slope_width(s);
    let mut lp = LinearProgram::minimize(
        std::iter::once(1.0)
            .chain(std::iter::repeat_n(0.0, w))
            .collect(),
    );
    lp.set_free(0);
    for (theta, &v) in s.points()[..j].iter().zip(s.values()) {
        let d: Vec<f64> = theta.iter().zip(x).map(|(t, x)| t - x).collect();
        let mut terms = vec![(0, 1.0)];
        terms.extend(slope_terms(s, 1, &d));
        lp.add_ge_sparse(&terms, v);
    }
    lp.add_le_sparse(
        &(1..=w).map(|k| (k, 1.0)).collect::<Vec<_>>(),
        s.lipschitz(),
    );
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok((sol.value, read_slope(s, 1, &sol.x))),
        st => Err(QreError::Internal(format!(
            "affine majorant LP reported {st:?}"
        ))),
    }
}

/// Dual of [`solve_plp`], written over the weights `p` of the top-`j` points:
///
/// ```text
/// max Σ v̂ p − L q  s.t.  Σ θ p − q·1 ≤ x,  Σ p = 1,  p, q ≥ 0
/// ```
///
/// (two-sided `|Σ θ p − x| ≤ q` when not monotone). It has `N + 1` or
/// `2N + 1` rows regardless of `j`. The slope is read off the row duals.
pub(crate) fn majorant_dual(s: &SortedSample, x: &[f64], j: usize) -> Result<(f64, Vec<f64>)> {
    let n = s.dim();
    let l = s.lipschitz();
    let mut cost: Vec<f64> = s.values()[..j].to_vec();
    cost.push(-l);
    let q = j;
    let mut lp = LinearProgram::maximize(cost);
    for k in 0..n {
        let mut row: Vec<f64> = s.points()[..j].iter().map(|t| t[k]).collect();
        row.push(-1.0);
        lp.add_le(row, x[k]);
    }
    if !s.monotone() {
        for k in 0..n {
            let mut row: Vec<f64> = s.points()[..j].iter().map(|t| -t[k]).collect();
            row.push(-1.0);
            lp.add_le(row, -x[k]);
        }
    }
    let mut simplex_row = vec![1.0; j + 1];
    simplex_row[q] = 0.0;
    lp.add_eq(simplex_row, 1.0);
    let sol = solve_lp(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(QreError::Internal(format!(
            "majorant dual LP reported {:?}",
            sol.status
        )));
    }
    let slope = (0..n)
        .map(|k| {
            if s.monotone() {
                sol.duals[k]
            } else {
                sol.duals[k] - sol.duals[n + k]
            }
        })
        .collect();
    Ok((sol.value, slope))
}

/// `ψ(x)` by binary search over level indices, one small LP per probe.
pub fn eval_psi(s: &SortedSample, x: &[f64]) -> Result<EnvelopeValue> {
    s.check_point(x)?;
    let res = search_levels(s.values(), true, |j| majorant_dual(s, x, j))?;
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

/// Smallest big-M for which the disjunctive program is exact:
/// `(v̂_max − v̂_min) + 2·L·max_θ ‖θ − x‖_∞`.
pub fn big_m_bound(s: &SortedSample, x: &[f64]) -> f64 {
    let spread = s
        .points()
        .iter()
        .map(|t| inf_dist(t, x))
        .fold(0.0, f64::max);
    (s.max_value() - s.min_value()) + 2.0 * s.lipschitz() * spread
}

pub fn default_big_m(s: &SortedSample, x: &[f64]) -> f64 {
    big_m_bound(s, x) + 1.0
}

pub(crate) fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Solution of the big-M disjunctive program at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct MilpEnvelope {
    pub value: f64,
    pub slope: Vec<f64>,
    pub nodes: usize,
}

/// Exact `ψ(x)` from the disjunctive program over the whole sample
///
/// ```text
/// min υ  s.t.  υ + s1(θ) ≥ v̂(θ)
///              s1(θ) − s2(θ) ≤ ⟨ξ, θ − x⟩
///              s1(θ) ≤ M u(θ),  s2(θ) ≤ M (1 − u(θ))
///              0 ≤ s1, s2 ≤ M,  u ∈ {0,1},  ‖ξ‖₁ ≤ L
/// ```
///
/// solved by branch-and-bound. Each row's `M` is capped by what the row can
/// actually need. Every admissible function satisfies
/// `f(x) ≥ v̂(θ) − L·‖θ − x‖_∞` (only the part of `θ − x` above zero counts in
/// monotone mode), so `υ` never drops below the best such bound `b`. Hence
/// `s1(θ) ≤ min(v̂(θ) − b, L·‖θ − x‖_∞)`, `s2(θ) ≤ L·‖θ − x‖_∞`, and
/// rows with `v̂(θ) ≤ b` need no binary at all.
pub fn solve_pmilp(s: &SortedSample, x: &[f64], big_m: f64) -> Result<MilpEnvelope> {
    s.check_point(x)?;
    let required = big_m_bound(s, x);
    if big_m.is_nan() || big_m < required {
        return Err(QreError::BigMTooSmall {
            given: big_m,
            required,
        });
    }
    let jj = s.len();
    let l = s.lipschitz();
    let reach = |a: &[f64], b: &[f64]| {
        if s.monotone() {
            a.iter().zip(b).map(|(a, b)| a - b).fold(0.0, f64::max)
        } else {
            inf_dist(a, b)
        }
    };
    let floor = s
        .points()
        .iter()
        .zip(s.values())
        .map(|(t, v)| v - l * reach(t, x))
        .fold(f64::NEG_INFINITY, f64::max);

    let w = slope_width(s);
    let s1 = 1 + w;
    let s2 = s1 + jj;
    let u = s2 + jj;
    let nvars = u + jj;
    let mut cost = vec![0.0; nvars];
    cost[0] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    lp.set_free(0);
    let mut binaries = Vec::new();
    for (i, (theta, &v)) in s.points().iter().zip(s.values()).enumerate() {
        let m1 = (v - floor).min(l * reach(theta, x)).clamp(0.0, big_m);
        let m2 = (l * reach(x, theta)).min(big_m);
        lp.add_ge_sparse(&[(0, 1.0), (s1 + i, 1.0)], v);
        let d: Vec<f64> = theta.iter().zip(x).map(|(t, x)| -(t - x)).collect();
        let mut terms = vec![(s1 + i, 1.0), (s2 + i, -1.0)];
        terms.extend(slope_terms(s, 1, &d));
        lp.add_le_sparse(&terms, 0.0);
        if m1 > 0.0 {
            lp.set_bounds(s1 + i, 0.0, m1);
            lp.set_bounds(s2 + i, 0.0, m2);
            lp.set_bounds(u + i, 0.0, 1.0);
            lp.add_le_sparse(&[(s1 + i, 1.0), (u + i, -m1)], 0.0);
            lp.add_le_sparse(&[(s2 + i, 1.0), (u + i, m2)], m2);
            binaries.push(u + i);
        } else {
            lp.set_bounds(s1 + i, 0.0, 0.0);
            lp.set_bounds(s2 + i, 0.0, m2);
            lp.set_bounds(u + i, 0.0, 0.0);
        }
    }
    lp.add_le_sparse(&(1..=w).map(|k| (k, 1.0)).collect::<Vec<_>>(), l);

    let sol = solve_milp(&MixedBinaryProgram::new(lp, binaries))?;
    match sol.status {
        LpStatus::Optimal => Ok(MilpEnvelope {
            value: sol.value,
            slope: read_slope(s, 1, &sol.x),
            nodes: sol.nodes,
        }),
        st => Err(QreError::Internal(format!(
            "disjunctive program reported {st:?}"
        ))),
    }
}

pub fn eval_psi_milp(s: &SortedSample, x: &[f64], big_m: f64) -> Result<f64> {
    Ok(solve_pmilp(s, x, big_m)?.value)
}
