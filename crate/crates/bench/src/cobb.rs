//! Cobb-Douglas value/cost ratio on a box.

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// `f(x) = α0·Π x_n^{α_n} / (c0 + Σ c_n·x_n)` on `[x_min, x_max]^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CobbDouglas {
    /// `α0, α1..αN`; the exponents `α1..αN` sum to one.
    pub alpha: Vec<f64>,
    /// `c0, c1..cN`.
    pub cost: Vec<f64>,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for CobbDouglas {
    fn default() -> Self {
        Self {
            alpha: vec![1.0, 0.6, 0.4],
            cost: vec![1.0, 1.0, 2.0],
            x_min: 0.5,
            x_max: 10.0,
        }
    }
}

impl CobbDouglas {
    pub fn new(alpha: Vec<f64>, cost: Vec<f64>, x_min: f64, x_max: f64) -> Result<Self> {
        let cd = Self {
            alpha,
            cost,
            x_min,
            x_max,
        };
        cd.validate()?;
        Ok(cd)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(BenchError::InvalidModel(m));
        if self.alpha.len() < 2 || self.alpha.len() != self.cost.len() {
            return bad(format!(
                "need N+1 exponents and costs, got {} and {}",
                self.alpha.len(),
                self.cost.len()
            ));
        }
        if self.alpha.iter().chain(&self.cost).any(|v| !v.is_finite()) {
            return bad("coefficients must be finite".into());
        }
        let sum: f64 = self.alpha[1..].iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return bad(format!("exponents sum to {sum}, expected 1"));
        }
        if !(self.x_min > 0.0 && self.x_min <= self.x_max && self.x_max.is_finite()) {
            return bad(format!(
                "box [{}, {}] must satisfy 0 < x_min ≤ x_max",
                self.x_min, self.x_max
            ));
        }
        let low = self.cost[0]
            + self.cost[1..]
                .iter()
                .map(|c| (c * self.x_min).min(c * self.x_max))
                .sum::<f64>();
        if low <= 0.0 {
            return bad("cost can vanish on the box".into());
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn lower(&self) -> Vec<f64> {
        vec![self.x_min; self.dim()]
    }

    pub fn upper(&self) -> Vec<f64> {
        vec![self.x_max; self.dim()]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().all(|&v| v >= self.x_min && v <= self.x_max)
    }

    fn raw(&self, x: &[f64]) -> f64 {
        let prod: f64 = x
            .iter()
            .zip(&self.alpha[1..])
            .map(|(v, a)| v.powf(*a))
            .product();
        let denom = self.cost[0]
            + x.iter()
                .zip(&self.cost[1..])
                .map(|(v, c)| v * c)
                .sum::<f64>();
        self.alpha[0] * prod / denom
    }
}

pub fn cobb_value(cd: &CobbDouglas, x: &[f64]) -> Result<f64> {
    if !cd.contains(x) {
        return Err(BenchError::OutOfDomain(x.to_vec()));
    }
    Ok(cd.raw(x))
}

/// Grid points per axis for [`true_optimum`].
pub const OPTIMUM_GRID: usize = 400;

/// Grid search (400 points per axis) then coordinate descent with step
/// halving down to 1e-9.
pub fn true_optimum(cd: &CobbDouglas) -> Result<(Vec<f64>, f64)> {
    let n = cd.dim();
    if n > 3 {
        return Err(BenchError::InvalidModel(format!(
            "grid oracle supports N ≤ 3, got {n}"
        )));
    }
    let (mut best_x, mut best) = (cd.lower(), f64::NEG_INFINITY);
    for x in grid(cd, OPTIMUM_GRID) {
        let v = cd.raw(&x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let mut step = (cd.x_max - cd.x_min) / (OPTIMUM_GRID - 1) as f64;
    while step >= 1e-9 {
        let mut moved = false;
        for k in 0..n {
            for dir in [1.0, -1.0] {
                let mut y = best_x.clone();
                y[k] = (y[k] + dir * step).clamp(cd.x_min, cd.x_max);
                let v = cd.raw(&y);
                if v > best {
                    best = v;
                    best_x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    Ok((best_x, best))
}

/// Uniform grid with `density` points per axis, endpoints included, first
/// coordinate varying slowest.
pub fn grid(cd: &CobbDouglas, density: usize) -> impl Iterator<Item = Vec<f64>> + '_ {
    let n = cd.dim();
    let density = density.max(2);
    let h = (cd.x_max - cd.x_min) / (density - 1) as f64;
    (0..density.pow(n as u32)).map(move |idx| {
        let mut rem = idx;
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            x[k] = cd.x_min + (rem % density) as f64 * h;
            rem /= density;
        }
        x
    })
}

/// Sup-norm Lipschitz constant `max ‖∇f‖₁` from central differences on a
/// grid with `density` points per axis.
pub fn lipschitz_estimate(cd: &CobbDouglas, density: usize) -> f64 {
    let h = 1e-6;
    grid(cd, density)
        .map(|x| {
            (0..cd.dim())
                .map(|k| {
                    let mut up = x.clone();
                    let mut down = x.clone();
                    up[k] = (x[k] + h).min(cd.x_max);
                    down[k] = (x[k] - h).max(cd.x_min);
                    ((cd.raw(&up) - cd.raw(&down)) / (up[k] - down[k])).abs()
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}
