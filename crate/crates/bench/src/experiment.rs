//! Desk-scale Cobb-Douglas study: optimality gaps, L1 errors, runtime
//! counts and contour exports for the envelope and the two baselines.

use std::time::Instant;

use qre_core::envelope::{default_big_m, eval_psi, solve_pmilp};
use qre_core::probe_budget;
use qre_core::problem::{Polyhedron, RobustProblem};
use qre_core::sample::{RawSample, SortedSample};
use qre_core::solver::solve_robust;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    default_cluster_count, fit_concave_regression, fit_piecewise_constant, ConcaveRegression,
    PiecewiseConstant,
};
use crate::cobb::{cobb_value, grid, true_optimum, CobbDouglas};
use crate::contour::{contour_segments, Segment};
use crate::error::{BenchError, Result};

/// Binaries the disjunctive program may carry (one per sample point).
pub const MAX_MILP_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Envelope,
    PiecewiseConstant,
    ConcaveRegression,
}

impl Method {
    pub const ALL: [Method; 3] = [
        Method::Envelope,
        Method::PiecewiseConstant,
        Method::ConcaveRegression,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Envelope => "envelope",
            Method::PiecewiseConstant => "piecewise_constant",
            Method::ConcaveRegression => "concave_regression",
        }
    }
}

/// Fields missing from a config file take their default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub model: CobbDouglas,
    /// Sample sizes of the gap study.
    pub sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub lipschitz: f64,
    /// Cluster count of the regression; `clamp(⌈J/20⌉, 3, 15)` when unset.
    pub clusters: Option<usize>,
    /// Worker cap; all cores when unset.
    pub threads: Option<usize>,
    pub l1_sizes: Vec<usize>,
    pub l1_density: usize,
    pub runtime_sizes: Vec<usize>,
    pub contour_size: usize,
    pub contour_density: usize,
    pub contour_levels: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: CobbDouglas::default(),
            sizes: vec![32, 64, 128],
            reps: 20,
            seed: 7,
            lipschitz: 0.30,
            clusters: None,
            threads: None,
            l1_sizes: vec![32, 64, 128, 256, 512],
            l1_density: 40,
            runtime_sizes: vec![16, 32, 64, 128, 256, 512, 1024],
            contour_size: 128,
            contour_density: 60,
            contour_levels: 8,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let bad = |m: &str| Err(BenchError::InvalidInput(m.into()));
        if self.reps == 0 {
            return bad("need at least one replication");
        }
        if self
            .sizes
            .iter()
            .chain(&self.l1_sizes)
            .chain(&self.runtime_sizes)
            .any(|&j| j == 0)
        {
            return bad("sample sizes must be positive");
        }
        if !(self.lipschitz > 0.0 && self.lipschitz.is_finite()) {
            return bad("Lipschitz constant must be positive");
        }
        if self.l1_density < 10 {
            return bad("L1 grid density must be at least 10");
        }
        Ok(())
    }
}

/// Stream of the replication `(j, rep)`; independent of scheduling.
pub fn replication_rng(seed: u64, j: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((j as u64) << 32) | rep as u64);
    rng
}

/// Stream shared by the nested-prefix studies (L1, runtime, contours).
pub fn path_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

/// `j` uniform points of the box with their exact values.
pub fn draw_sample<R: Rng>(cd: &CobbDouglas, j: usize, rng: &mut R) -> (Vec<Vec<f64>>, Vec<f64>) {
    let points: Vec<Vec<f64>> = (0..j)
        .map(|_| {
            (0..cd.dim())
                .map(|_| rng.gen_range(cd.x_min..=cd.x_max))
                .collect()
        })
        .collect();
    let values = points
        .iter()
        .map(|p| cobb_value(cd, p).unwrap_or(f64::NAN))
        .collect();
    (points, values)
}

/// The three approximations fitted to one sample.
#[derive(Debug, Clone)]
pub struct Fitted {
    pub envelope: SortedSample,
    pub constant: PiecewiseConstant,
    pub regression: ConcaveRegression,
}

impl Fitted {
    pub fn new(
        points: &[Vec<f64>],
        values: &[f64],
        lipschitz: f64,
        clusters: Option<usize>,
    ) -> Result<Self> {
        let envelope = SortedSample::new(RawSample::new(
            points.to_vec(),
            values.to_vec(),
            lipschitz,
            false,
        ))?;
        let n = points.first().map_or(1, Vec::len);
        let k = clusters
            .unwrap_or_else(|| default_cluster_count(points.len()))
            .min(points.len() / (n + 1))
            .max(1);
        Ok(Self {
            envelope,
            constant: fit_piecewise_constant(points, values)?,
            regression: fit_concave_regression(points, values, k)?,
        })
    }

    pub fn eval(&self, method: Method, x: &[f64]) -> Result<f64> {
        match method {
            Method::Envelope => Ok(eval_psi(&self.envelope, x)?.value),
            Method::PiecewiseConstant => self.constant.eval(x),
            Method::ConcaveRegression => Ok(self.regression.eval(x)),
        }
    }

    /// Maximizer of the approximation over the model box.
    pub fn maximize(&self, method: Method, cd: &CobbDouglas) -> Result<Vec<f64>> {
        match method {
            Method::Envelope => {
                let rp = RobustProblem::identity(Polyhedron::boxed(cd.lower(), cd.upper())?)?;
                let mut z = solve_robust(&self.envelope, &rp)?.z;
                for v in &mut z {
                    *v = v.clamp(cd.x_min, cd.x_max);
                }
                Ok(z)
            }
            Method::PiecewiseConstant => Ok(self.constant.maximize().0),
            Method::ConcaveRegression => {
                let (mut z, _) = self.regression.maximize(&cd.lower(), &cd.upper())?;
                for v in &mut z {
                    *v = v.clamp(cd.x_min, cd.x_max);
                }
                Ok(z)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub j: usize,
    pub rep: usize,
    /// Percent gap per method, in [`Method::ALL`] order.
    pub gaps: [f64; 3],
    /// Whether the envelope reproduced every sampled value (within 1e-6).
    pub majorizes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub method: Method,
    pub j: usize,
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapStudy {
    pub optimum_x: Vec<f64>,
    pub optimum: f64,
    pub rows: Vec<GapRow>,
    pub replications: Vec<ReplicationRecord>,
}

impl GapStudy {
    pub fn row(&self, method: Method, j: usize) -> Option<&GapRow> {
        self.rows.iter().find(|r| r.method == method && r.j == j)
    }
}

/// Runs `f` on a pool capped at `threads` workers.
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn replicate(
    cfg: &ExperimentConfig,
    optimum: f64,
    j: usize,
    rep: usize,
) -> Result<ReplicationRecord> {
    let cd = &cfg.model;
    let (points, values) = draw_sample(cd, j, &mut replication_rng(cfg.seed, j, rep));
    let fitted = Fitted::new(&points, &values, cfg.lipschitz, cfg.clusters)?;
    let mut gaps = [0.0; 3];
    for (g, method) in gaps.iter_mut().zip(Method::ALL) {
        let x = fitted.maximize(method, cd)?;
        *g = 100.0 * (optimum - cobb_value(cd, &x)?) / optimum;
    }
    let mut majorizes = true;
    for (p, v) in points.iter().zip(&values) {
        majorizes &= eval_psi(&fitted.envelope, p)?.value >= v - 1e-6;
    }
    Ok(ReplicationRecord {
        j,
        rep,
        gaps,
        majorizes,
    })
}

fn summarize(method: usize, j: usize, gaps: &[f64]) -> GapRow {
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = if gaps.len() > 1 {
        gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    GapRow {
        method: Method::ALL[method],
        j,
        mean,
        std: var.sqrt(),
        max: gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min: gaps.iter().copied().fold(f64::INFINITY, f64::min),
    }
}

/// Percent optimality gaps `100·(f* − f(x̂))/f*` of each method's maximizer,
/// over `reps` replications per sample size.
pub fn run_gap_experiment(cfg: &ExperimentConfig) -> Result<GapStudy> {
    cfg.validate()?;
    let (optimum_x, optimum) = true_optimum(&cfg.model)?;
    let jobs: Vec<(usize, usize)> = cfg
        .sizes
        .iter()
        .flat_map(|&j| (0..cfg.reps).map(move |r| (j, r)))
        .collect();
    let replications = with_pool(cfg.threads, || {
        jobs.par_iter()
            .map(|&(j, r)| replicate(cfg, optimum, j, r))
            .collect::<Result<Vec<_>>>()
    })??;
    let mut rows = Vec::new();
    for &j in &cfg.sizes {
        for m in 0..3 {
            let gaps: Vec<f64> = replications
                .iter()
                .filter(|r| r.j == j)
                .map(|r| r.gaps[m])
                .collect();
            rows.push(summarize(m, j, &gaps));
        }
    }
    Ok(GapStudy {
        optimum_x,
        optimum,
        rows,
        replications,
    })
}

/// Mean absolute deviation from the model over a grid with `density` points
/// per axis. `−∞` values (outside a piecewise-constant hull) count as the
/// smallest model value on the grid.
pub fn l1_error(
    cd: &CobbDouglas,
    eval: impl Fn(&[f64]) -> Result<f64>,
    density: usize,
) -> Result<f64> {
    if density < 10 {
        return Err(BenchError::InvalidInput(format!(
            "grid density {density} is below 10"
        )));
    }
    let pts: Vec<Vec<f64>> = grid(cd, density).collect();
    let truth: Vec<f64> = pts
        .iter()
        .map(|x| cobb_value(cd, x))
        .collect::<Result<_>>()?;
    let floor = truth.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (x, t) in pts.iter().zip(&truth) {
        let g = eval(x)?;
        let g = if g == f64::NEG_INFINITY { floor } else { g };
        total += (t - g).abs();
    }
    Ok(total / pts.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Row {
    pub method: Method,
    pub j: usize,
    pub l1: f64,
}

/// L1 errors along one nested sample path: the sample of size `J` is the
/// first `J` draws of a single stream.
pub fn run_l1_study(cfg: &ExperimentConfig) -> Result<Vec<L1Row>> {
    cfg.validate()?;
    let cd = &cfg.model;
    let max_j = cfg.l1_sizes.iter().copied().max().unwrap_or(0);
    let (points, values) = draw_sample(cd, max_j, &mut path_rng(cfg.seed));
    let jobs: Vec<(usize, Method)> = cfg
        .l1_sizes
        .iter()
        .flat_map(|&j| Method::ALL.into_iter().map(move |m| (j, m)))
        .collect();
    with_pool(cfg.threads, || {
        jobs.par_iter()
            .map(|&(j, method)| {
                let fitted = Fitted::new(&points[..j], &values[..j], cfg.lipschitz, cfg.clusters)?;
                let l1 = l1_error(cd, |x| fitted.eval(method, x), cfg.l1_density)?;
                Ok(L1Row { method, j, l1 })
            })
            .collect::<Result<Vec<_>>>()
    })?
}

/// Work counts of one point evaluation and one robust solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub j: usize,
    /// LPs solved by the binary search for `ψ(x)`.
    pub eval_lp_solves: usize,
    pub budget: usize,
    /// Branch-and-bound nodes of the disjunctive program at the same `x`;
    /// absent above [`MAX_MILP_POINTS`].
    pub milp_nodes: Option<usize>,
    /// `|ψ_LP(x) − ψ_MILP(x)|`.
    pub milp_deviation: Option<f64>,
    /// LPs solved by the robust binary search over the box.
    pub solve_lp_solves: usize,
    pub eval_seconds: f64,
    pub milp_seconds: Option<f64>,
}

pub fn run_runtime_study(cfg: &ExperimentConfig) -> Result<Vec<RuntimeRow>> {
    cfg.validate()?;
    let cd = &cfg.model;
    let mut rng = path_rng(cfg.seed);
    let max_j = cfg.runtime_sizes.iter().copied().max().unwrap_or(0);
    let (points, values) = draw_sample(cd, max_j, &mut rng);
    let x: Vec<f64> = (0..cd.dim())
        .map(|_| rng.gen_range(cd.x_min..=cd.x_max))
        .collect();
    let rp = RobustProblem::identity(Polyhedron::boxed(cd.lower(), cd.upper())?)?;
    cfg.runtime_sizes
        .iter()
        .map(|&j| {
            let s = SortedSample::new(RawSample::new(
                points[..j].to_vec(),
                values[..j].to_vec(),
                cfg.lipschitz,
                false,
            ))?;
            let start = Instant::now();
            let ev = eval_psi(&s, &x)?;
            let eval_seconds = start.elapsed().as_secs_f64();
            let (milp_nodes, milp_deviation, milp_seconds) = if j <= MAX_MILP_POINTS {
                let start = Instant::now();
                let m = solve_pmilp(&s, &x, default_big_m(&s, &x))?;
                (
                    Some(m.nodes),
                    Some((m.value - ev.value).abs()),
                    Some(start.elapsed().as_secs_f64()),
                )
            } else {
                (None, None, None)
            };
            Ok(RuntimeRow {
                j,
                eval_lp_solves: ev.lp_solves,
                budget: probe_budget(j),
                milp_nodes,
                milp_deviation,
                solve_lp_solves: solve_robust(&s, &rp)?.lp_solves,
                eval_seconds,
                milp_seconds,
            })
        })
        .collect()
}

/// Contour segments of one method (or of the model itself when `method`
/// is `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSet {
    pub name: &'static str,
    pub levels: Vec<(f64, Vec<Segment>)>,
}

/// Level curves of the model and of each approximation fitted to the first
/// `contour_size` path points, at `contour_levels` values evenly spaced
/// strictly inside the model's range on the grid. Two-dimensional models only.
pub fn run_contours(cfg: &ExperimentConfig) -> Result<Vec<ContourSet>> {
    cfg.validate()?;
    let cd = &cfg.model;
    if cd.dim() != 2 {
        return Err(BenchError::InvalidInput(
            "contours need a two-dimensional model".into(),
        ));
    }
    let d = cfg.contour_density.max(2);
    let axis: Vec<f64> = (0..d)
        .map(|i| cd.x_min + (cd.x_max - cd.x_min) * i as f64 / (d - 1) as f64)
        .collect();
    let (points, values) = draw_sample(cd, cfg.contour_size, &mut path_rng(cfg.seed));
    let fitted = Fitted::new(&points, &values, cfg.lipschitz, cfg.clusters)?;

    let field = |f: &(dyn Fn(&[f64]) -> Result<f64> + Sync)| -> Result<Vec<Vec<f64>>> {
        axis.par_iter()
            .map(|&a| axis.iter().map(|&b| f(&[a, b])).collect::<Result<Vec<_>>>())
            .collect()
    };
    let truth = with_pool(cfg.threads, || field(&|x: &[f64]| cobb_value(cd, x)))??;
    let lo = truth
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = truth
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let levels: Vec<f64> = (1..=cfg.contour_levels)
        .map(|k| lo + (hi - lo) * k as f64 / (cfg.contour_levels + 1) as f64)
        .collect();

    let mut fields = vec![("true", truth)];
    for method in Method::ALL {
        let mut f = with_pool(cfg.threads, || field(&|x: &[f64]| fitted.eval(method, x)))??;
        for v in f.iter_mut().flatten() {
            if *v == f64::NEG_INFINITY {
                *v = lo;
            }
        }
        fields.push((method.name(), f));
    }
    Ok(fields
        .into_iter()
        .map(|(name, f)| ContourSet {
            name,
            levels: levels
                .iter()
                .map(|&l| (l, contour_segments(&axis, &axis, &f, l)))
                .collect(),
        })
        .collect())
}
