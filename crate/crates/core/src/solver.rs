//! Robust maximization `max_{z ∈ Z} ψ(G(z))` by binary search over level
//! indices, one LP per probe.

use std::time::Instant;

use qre_lp::{solve_lp, LinearProgram, LpStatus};
use serde::{Deserialize, Serialize};

use crate::envelope::eval_psi;
use crate::error::{QreError, Result};
use crate::problem::{OutputMap, RobustProblem};
use crate::sample::SortedSample;
use crate::search::search_levels;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: String,
    pub z: Vec<f64>,
    pub value: f64,
    /// Final level index for the binary search; zero for other methods.
    pub level_index: usize,
    pub probes: Vec<ProbeRecord>,
    pub lp_solves: usize,
    pub milp_solves: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `ψ(G(z))` recomputed independently at the returned point.
    pub check_value: Option<f64>,
    pub wall_time_s: f64,
}

impl SolveReport {
    /// Subproblems solved by the method's main loop.
    pub fn subproblems(&self) -> usize {
        self.lp_solves + self.milp_solves
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdjSolution {
    pub value: f64,
    pub z: Vec<f64>,
    pub p: Vec<f64>,
}

/// Highest level reachable with the top-`j` points:
///
/// ```text
/// max υ  s.t.  t ≥ Σ θ̃ p + (υ/L)·1,  t ≤ G(z),  Σ p = 1,  p ≥ 0,  z ∈ Z
/// ```
///
/// `t ≤ G(z)` is one row per affine piece. Without monotonicity the
/// condition becomes `Σ v̂ p − L q ≥ υ`, `|Σ θ p − G(z)| ≤ q`, which needs an
/// affine `G`.
pub fn solve_gdj(s: &SortedSample, rp: &RobustProblem, j: usize) -> Result<GdjSolution> {
    s.check_index(j)?;
    if rp.output_dim() != s.dim() {
        return Err(QreError::DimensionMismatch(format!(
            "output map has dimension {}, sample has {}",
            rp.output_dim(),
            s.dim()
        )));
    }
    if s.monotone() {
        gdj_monotone(s, rp, j)
    } else {
        gdj_two_sided(s, rp, j)
    }
}

fn finish(sol: qre_lp::LpSolution, t: usize, p0: usize, j: usize) -> Result<GdjSolution> {
    match sol.status {
        LpStatus::Optimal => Ok(GdjSolution {
            value: sol.value,
            z: sol.x[..t].to_vec(),
            p: sol.x[p0..p0 + j].to_vec(),
        }),
        LpStatus::Infeasible => Err(QreError::InfeasibleDecisionSet),
        LpStatus::Unbounded => Err(QreError::UnboundedDecisionSet),
    }
}

fn gdj_monotone(s: &SortedSample, rp: &RobustProblem, j: usize) -> Result<GdjSolution> {
    let t = rp.decision_dim();
    let n = s.dim();
    let l = s.lipschitz();
    let (tv, upsilon) = match rp.output {
        OutputMap::Identity => (0, t),
        OutputMap::Components(_) => (t, t + n),
    };
    let p0 = upsilon + 1;
    let mut cost = vec![0.0; p0 + j];
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
    for k in 0..n {
        let mut terms: Vec<(usize, f64)> = s.translated()[..j]
            .iter()
            .enumerate()
            .map(|(i, th)| (p0 + i, th[k]))
            .collect();
        terms.push((upsilon, 1.0 / l));
        terms.push((tv + k, -1.0));
        lp.add_le_sparse(&terms, 0.0);
    }
    lp.add_eq_sparse(&(p0..p0 + j).map(|i| (i, 1.0)).collect::<Vec<_>>(), 1.0);
    finish(solve_lp(&lp)?, t, p0, j)
}

fn gdj_two_sided(s: &SortedSample, rp: &RobustProblem, j: usize) -> Result<GdjSolution> {
    if !rp.is_affine() {
        return Err(QreError::NonAffineOutputMap);
    }
    let t = rp.decision_dim();
    let n = s.dim();
    let l = s.lipschitz();
    let upsilon = t;
    let q = t + 1;
    let p0 = t + 2;
    let mut cost = vec![0.0; p0 + j];
    cost[upsilon] = 1.0;
    let mut lp = LinearProgram::maximize(cost);
    rp.domain.constrain(&mut lp, 0);
    lp.set_free(upsilon);

    let mut value_row: Vec<(usize, f64)> = s.values()[..j]
        .iter()
        .enumerate()
        .map(|(i, &v)| (p0 + i, -v))
        .collect();
    value_row.push((upsilon, 1.0));
    value_row.push((q, l));
    lp.add_le_sparse(&value_row, 0.0);

    for k in 0..n {
        let (a, beta): (Vec<f64>, f64) = match &rp.output {
            OutputMap::Identity => {
                let mut e = vec![0.0; t];
                e[k] = 1.0;
                (e, 0.0)
            }
            OutputMap::Components(c) => (c[k].pieces[0].a.clone(), c[k].pieces[0].beta),
        };
        for sign in [1.0, -1.0] {
            let mut terms: Vec<(usize, f64)> = s.points()[..j]
                .iter()
                .enumerate()
                .map(|(i, th)| (p0 + i, sign * th[k]))
                .collect();
            terms.extend(a.iter().enumerate().map(|(c, &v)| (c, -sign * v)));
            terms.push((q, -1.0));
            lp.add_le_sparse(&terms, sign * beta);
        }
    }
    lp.add_eq_sparse(&(p0..p0 + j).map(|i| (i, 1.0)).collect::<Vec<_>>(), 1.0);
    finish(solve_lp(&lp)?, t, p0, j)
}

/// Binary search over level indices. Each probe solves [`solve_gdj`]; the
/// loop keeps `j1 = J, j2 = 1`, probes `j = ⌊(j1 + j2)/2⌋`, moves `j2 := j+1`
/// when `υ_j ≤ v̂_{j+1}` and `j1 := j` otherwise, and returns
/// `min(υ_j, v̂_j)` at the final index together with its maximizer.
pub fn solve_robust(s: &SortedSample, rp: &RobustProblem) -> Result<SolveReport> {
    let start = Instant::now();
    let res = search_levels(s.values(), false, |j| {
        let g = solve_gdj(s, rp, j)?;
        Ok((g.value, g.z))
    })?;
    let z = res.payload;
    let check = eval_psi(s, &rp.apply(&z))?.value;
    Ok(SolveReport {
        method: "binary".into(),
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
