//! Target-based representation of the worst-case valuation: one convex
//! acceptance measure per sample index plus a level-dependent target.
//!
//! For the top-`j` points the acceptance set is
//! `𝒜_j = conv{θ̃_1..θ̃_j} + c_j·1 + ℝ^N_+`, with `c_j` chosen so that the
//! origin sits on its boundary, and `μ_j(x) = inf{m : x + m·1 ∈ 𝒜_j}`. With
//! the target `τ(υ) = υ/L − c_{κ(υ)}`,
//!
//! ```text
//! ψ(x) = sup{υ ≤ υ_max : μ_{κ(υ)}(x − τ(υ)·1) ≤ 0}.
//! ```

use qre_lp::{solve_lp, LinearProgram, LpStatus};
use serde::{Deserialize, Serialize};

use crate::envelope::inf_dist;
use crate::error::{QreError, Result};
use crate::sample::SortedSample;

/// Absolute tolerance of the level bisection.
pub const BISECTION_TOL: f64 = 1e-7;
/// `μ` values up to this count as acceptable.
pub const ACCEPT_TOL: f64 = 1e-9;

/// `inf{m : x + m·1 ≥ Σ g p, p in the simplex}`, i.e. `min_p max_n (Σ g p − x)_n`.
fn measure(generators: &[Vec<f64>], offset: f64, x: &[f64]) -> Result<f64> {
    let j = generators.len();
    let m = j;
    let mut cost = vec![0.0; j + 1];
    cost[m] = 1.0;
    let mut lp = LinearProgram::minimize(cost);
    lp.set_free(m);
    for (k, &xk) in x.iter().enumerate() {
        let mut row: Vec<f64> = generators.iter().map(|g| g[k]).collect();
        row.push(-1.0);
        lp.add_le(row, xk - offset);
    }
    let mut simplex_row = vec![1.0; j + 1];
    simplex_row[m] = 0.0;
    lp.add_eq(simplex_row, 1.0);
    let sol = solve_lp(&lp)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.value),
        st => Err(QreError::Internal(format!("acceptance LP reported {st:?}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceFamily {
    /// Translation subtracted from the data and from every query.
    pub shift: Vec<f64>,
    /// `c_1..c_J`.
    pub constants: Vec<f64>,
    sample: SortedSample,
}

/// Builds `c_j` for every `j` (one LP each) in the sample's own frame.
/// `μ_j(0) = 0` holds for any frame, since `c_j` puts the origin on the
/// boundary of `𝒜_j`.
pub fn compute_acceptance(s: &SortedSample) -> Result<AcceptanceFamily> {
    family_with_shift(s, vec![0.0; s.dim()])
}

/// Same as [`compute_acceptance`] after translating the data so that the
/// origin lies in the bounding box of the points (the projection of the
/// origin onto that box is subtracted). Queries are shifted likewise.
pub fn compute_acceptance_normalized(s: &SortedSample) -> Result<AcceptanceFamily> {
    let shift = (0..s.dim())
        .map(|k| {
            let lo = s
                .points()
                .iter()
                .map(|p| p[k])
                .fold(f64::INFINITY, f64::min);
            let hi = s
                .points()
                .iter()
                .map(|p| p[k])
                .fold(f64::NEG_INFINITY, f64::max);
            0.0f64.clamp(lo, hi)
        })
        .collect();
    family_with_shift(s, shift)
}

fn family_with_shift(s: &SortedSample, shift: Vec<f64>) -> Result<AcceptanceFamily> {
    if !s.monotone() {
        return Err(QreError::NonMonotoneUnsupported);
    }
    let sample = s.shifted(&shift);
    let zero = vec![0.0; s.dim()];
    let constants = (1..=s.len())
        .map(|j| measure(&sample.translated()[..j], 0.0, &zero).map(|m| -m))
        .collect::<Result<Vec<f64>>>()?;
    Ok(AcceptanceFamily {
        shift,
        constants,
        sample,
    })
}

impl AcceptanceFamily {
    pub fn len(&self) -> usize {
        self.constants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constants.is_empty()
    }

    /// The normalized sample the family was built from.
    pub fn sample(&self) -> &SortedSample {
        &self.sample
    }

    /// Generators of `𝒜_j`: `θ̃_i + c_j·1` for `i ≤ j` (normalized frame).
    pub fn generators(&self, j: usize) -> Result<Vec<Vec<f64>>> {
        self.sample.check_index(j)?;
        let c = self.constants[j - 1];
        Ok(self.sample.translated()[..j]
            .iter()
            .map(|t| t.iter().map(|v| v + c).collect())
            .collect())
    }

    /// `τ(υ) = υ/L − c_{κ(υ)}` for `υ ≤ υ_max`.
    pub fn target(&self, level: f64) -> Result<f64> {
        let j = self.sample.level_index(level)?;
        Ok(level / self.sample.lipschitz() - self.constants[j - 1])
    }

    /// `x` given in original coordinates, moved into the normalized frame.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.shift).map(|(a, s)| a - s).collect()
    }
}

/// `μ_j(x)` with `x` in the family's normalized frame.
pub fn eval_mu(fam: &AcceptanceFamily, j: usize, x: &[f64]) -> Result<f64> {
    fam.sample.check_index(j)?;
    fam.sample.check_point(x)?;
    measure(&fam.sample.translated()[..j], fam.constants[j - 1], x)
}

/// `sup{υ ≤ υ_max : μ_{κ(υ)}(x − τ(υ)·1) ≤ 0}` by bisection on
/// `[v̂_min − L·diam_∞(Θ ∪ {x}), υ_max]`; `x` in original coordinates.
pub fn eval_target_representation(fam: &AcceptanceFamily, x: &[f64]) -> Result<f64> {
    let s = &fam.sample;
    let y = fam.normalize(x);
    s.check_point(&y)?;
    let accept = |level: f64| -> Result<bool> {
        let j = s.level_index(level)?;
        let tau = fam.target(level)?;
        let shifted: Vec<f64> = y.iter().map(|v| v - tau).collect();
        Ok(eval_mu(fam, j, &shifted)? <= ACCEPT_TOL)
    };

    let mut hi = s.max_value();
    if accept(hi)? {
        return Ok(hi);
    }
    let diam = s
        .points()
        .iter()
        .flat_map(|a| s.points().iter().map(move |b| inf_dist(a, b)))
        .chain(s.points().iter().map(|a| inf_dist(a, &y)))
        .fold(0.0, f64::max);
    let mut lo = s.min_value() - s.lipschitz() * diam;
    if !accept(lo)? {
        return Err(QreError::Internal(format!(
            "lower bracket {lo} is not acceptable"
        )));
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if accept(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Acceptance set given by generators: `conv(generators) + ℝ^N_+`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceSet {
    pub generators: Vec<Vec<f64>>,
}

impl AcceptanceSet {
    pub fn measure(&self, x: &[f64]) -> Result<f64> {
        measure(&self.generators, 0.0, x)
    }
}

/// Target and acceptance set on one level segment: `τ(υ) = slope·υ + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSegment {
    /// Index into [`TargetSpec::sets`].
    pub set: usize,
    pub slope: Vec<f64>,
    pub intercept: Vec<f64>,
}

impl TargetSegment {
    pub fn target(&self, level: f64) -> Vec<f64> {
        self.slope
            .iter()
            .zip(&self.intercept)
            .map(|(a, b)| a * level + b)
            .collect()
    }
}

/// General valuation `ψ(x) = sup{υ : μ_{κ̃(υ)}(x − τ⃗(υ)) ≤ 0}`.
///
/// Levels are split by strictly decreasing `breakpoints`; segment `0` covers
/// `(breakpoints[0], max_level]`, segment `s` covers
/// `(breakpoints[s], breakpoints[s-1]]` and the last segment is unbounded
/// below. The segment's `set` plays the role of `κ̃` and must not decrease
/// from one segment to the next; the family size is `sets.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub sets: Vec<AcceptanceSet>,
    pub breakpoints: Vec<f64>,
    pub segments: Vec<TargetSegment>,
    #[serde(default)]
    pub max_level: Option<f64>,
}

impl TargetSpec {
    pub fn family_size(&self) -> usize {
        self.sets.len()
    }

    fn dim(&self) -> usize {
        self.sets
            .first()
            .and_then(|s| s.generators.first())
            .map_or(0, Vec::len)
    }

    /// Shape checks plus the two monotonicity requirements: the set index
    /// is non-increasing in the level and every target component is
    /// non-decreasing, both within segments and across breakpoints.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QreError::SpecViolation(m));
        let n = self.dim();
        if n == 0 {
            return bad("no acceptance set generators".into());
        }
        for (i, set) in self.sets.iter().enumerate() {
            if set.generators.is_empty() {
                return bad(format!("set {i} has no generators"));
            }
            if set
                .generators
                .iter()
                .any(|g| g.len() != n || g.iter().any(|v| !v.is_finite()))
            {
                return bad(format!("set {i} has a malformed generator"));
            }
        }
        if self.segments.len() != self.breakpoints.len() + 1 {
            return bad(format!(
                "{} breakpoints need {} segments, got {}",
                self.breakpoints.len(),
                self.breakpoints.len() + 1,
                self.segments.len()
            ));
        }
        if self.breakpoints.iter().any(|b| !b.is_finite())
            || self.breakpoints.windows(2).any(|w| w[0] <= w[1])
        {
            return bad("breakpoints must be finite and strictly decreasing".into());
        }
        if let (Some(top), Some(&b0)) = (self.max_level, self.breakpoints.first()) {
            if top.is_nan() || top <= b0 {
                return bad(format!(
                    "max level {top} must exceed the first breakpoint {b0}"
                ));
            }
        }
        for (k, seg) in self.segments.iter().enumerate() {
            if seg.set >= self.sets.len() {
                return bad(format!("segment {k} refers to missing set {}", seg.set));
            }
            if seg.slope.len() != n || seg.intercept.len() != n {
                return bad(format!("segment {k} target has the wrong dimension"));
            }
            if seg
                .slope
                .iter()
                .chain(&seg.intercept)
                .any(|v| !v.is_finite())
            {
                return bad(format!("segment {k} target is not finite"));
            }
            if seg.slope.iter().any(|&a| a < 0.0) {
                return bad(format!("segment {k} target decreases with the level"));
            }
        }
        for (k, pair) in self.segments.windows(2).enumerate() {
            let (upper, lower) = (&pair[0], &pair[1]);
            if lower.set < upper.set {
                return bad(format!(
                    "set index increases with the level at breakpoint {k}"
                ));
            }
            let b = self.breakpoints[k];
            let above = upper.target(b);
            let below = lower.target(b);
            if below.iter().zip(&above).any(|(lo, hi)| *lo > hi + 1e-12) {
                return bad(format!("target jumps down at breakpoint {b}"));
            }
        }
        Ok(())
    }

    /// Whether consecutive sets used by the spec are nested
    /// (`𝒜_l ⊆ 𝒜_{l+1}`), checked generator by generator.
    pub fn check_nested(&self) -> Result<bool> {
        for pair in self.sets.windows(2) {
            for g in &pair[0].generators {
                if pair[1].measure(g)? > ACCEPT_TOL {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn segment_of(&self, level: f64) -> &TargetSegment {
        &self.segments[self.breakpoints.partition_point(|&b| b >= level)]
    }

    fn accepts(&self, x: &[f64], level: f64) -> Result<bool> {
        let seg = self.segment_of(level);
        let y: Vec<f64> = x
            .iter()
            .zip(seg.target(level))
            .map(|(a, t)| a - t)
            .collect();
        Ok(self.sets[seg.set].measure(&y)? <= ACCEPT_TOL)
    }

    /// Builds the spec reproducing the worst-case valuation of `fam` (in
    /// the family's normalized frame): one segment per distinct sample
    /// value, target `υ/L − c_j` in every component.
    pub fn from_family(fam: &AcceptanceFamily) -> Result<Self> {
        let s = fam.sample();
        let n = s.dim();
        let mut distinct: Vec<f64> = s.values().to_vec();
        distinct.dedup();
        let sets = (1..=s.len())
            .map(|j| fam.generators(j).map(|g| AcceptanceSet { generators: g }))
            .collect::<Result<_>>()?;
        let segments = distinct
            .iter()
            .map(|&u| {
                let j = s.level_index(u)?;
                Ok(TargetSegment {
                    set: j - 1,
                    slope: vec![1.0 / s.lipschitz(); n],
                    intercept: vec![-fam.constants[j - 1]; n],
                })
            })
            .collect::<Result<_>>()?;
        let spec = Self {
            sets,
            breakpoints: distinct[1..].to_vec(),
            segments,
            max_level: Some(distinct[0]),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Bisection for the largest acceptable level; `±∞` when no finite bracket
/// exists within 200 doublings.
pub fn eval_constructed_valuation(spec: &TargetSpec, x: &[f64]) -> Result<f64> {
    spec.validate()?;
    if x.len() != spec.dim() || x.iter().any(|v| !v.is_finite()) {
        return Err(QreError::DimensionMismatch(format!(
            "query has dimension {}, spec has {}",
            x.len(),
            spec.dim()
        )));
    }
    let anchor = spec
        .breakpoints
        .first()
        .copied()
        .or(spec.max_level)
        .unwrap_or(0.0);
    let mut hi = match spec.max_level {
        Some(top) => {
            if spec.accepts(x, top)? {
                return Ok(top);
            }
            top
        }
        None => {
            let mut step = 1.0;
            let mut h = anchor;
            let mut found = false;
            for _ in 0..200 {
                if !spec.accepts(x, h)? {
                    found = true;
                    break;
                }
                h = anchor + step;
                step *= 2.0;
            }
            if !found {
                return Ok(f64::INFINITY);
            }
            h
        }
    };
    let bottom = spec.breakpoints.last().copied().unwrap_or(anchor).min(hi);
    let mut step = 1.0;
    let mut lo = bottom - step;
    let mut found = false;
    for _ in 0..200 {
        if spec.accepts(x, lo)? {
            found = true;
            break;
        }
        hi = lo;
        step *= 2.0;
        lo = bottom - step;
    }
    if !found {
        return Ok(f64::NEG_INFINITY);
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if spec.accepts(x, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
