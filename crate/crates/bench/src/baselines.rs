//! Comparison methods: piecewise-constant quasiconcave fit and clustered
//! concave regression.

use nalgebra::{DMatrix, DVector};
use qre_lp::{solve_lp, LinearProgram, LpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BenchError, Result};

fn check_data(points: &[Vec<f64>], values: &[f64]) -> Result<usize> {
    let n = points
        .first()
        .map(Vec::len)
        .ok_or_else(|| BenchError::InvalidInput("no data points".into()))?;
    if n == 0 || points.len() != values.len() || points.iter().any(|p| p.len() != n) {
        return Err(BenchError::InvalidInput(
            "points and values disagree in shape".into(),
        ));
    }
    if points
        .iter()
        .flatten()
        .chain(values)
        .any(|v| !v.is_finite())
    {
        return Err(BenchError::InvalidInput("non-finite data".into()));
    }
    Ok(n)
}

/// `g(x) = max{v̂_j : x ∈ conv{θ_1..θ_j}}` over points sorted by value,
/// `−∞` outside the hull of all points.
#[derive(Debug, Clone)]
pub struct PiecewiseConstant {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

pub fn fit_piecewise_constant(points: &[Vec<f64>], values: &[f64]) -> Result<PiecewiseConstant> {
    check_data(points, values)?;
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    Ok(PiecewiseConstant {
        points: order.iter().map(|&i| points[i].clone()).collect(),
        values: order.iter().map(|&i| values[i]).collect(),
    })
}

impl PiecewiseConstant {
    /// Whether `x` is a convex combination of the top `j` points.
    fn in_hull(&self, x: &[f64], j: usize) -> Result<bool> {
        let mut lp = LinearProgram::minimize(vec![0.0; j]);
        for (k, &xk) in x.iter().enumerate() {
            lp.add_eq(self.points[..j].iter().map(|p| p[k]).collect(), xk);
        }
        lp.add_eq(vec![1.0; j], 1.0);
        Ok(solve_lp(&lp)?.status == LpStatus::Optimal)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let big_j = self.values.len();
        if x.len() != self.points[0].len() {
            return Err(BenchError::InvalidInput(format!(
                "query of dimension {}",
                x.len()
            )));
        }
        if !self.in_hull(x, big_j)? {
            return Ok(f64::NEG_INFINITY);
        }
        // hull membership only grows with j
        let (mut lo, mut hi) = (1, big_j);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.in_hull(x, mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(self.values[lo - 1])
    }

    /// Best sampled point; the fit never exceeds its value.
    pub fn maximize(&self) -> (Vec<f64>, f64) {
        (self.points[0].clone(), self.values[0])
    }
}

/// Affine piece `a·x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFit {
    pub a: Vec<f64>,
    pub b: f64,
}

impl AffineFit {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + self.b
    }
}

/// Minimum of per-cluster least-squares affine fits.
#[derive(Debug, Clone)]
pub struct ConcaveRegression {
    pub fits: Vec<AffineFit>,
}

/// Seed of the k-means initialization.
pub const KMEANS_SEED: u64 = 0x6b6d_6561_6e73;
pub const KMEANS_ITERATIONS: usize = 50;

/// `clamp(⌈J/20⌉, 3, 15)`.
pub fn default_cluster_count(j: usize) -> usize {
    j.div_ceil(20).clamp(3, 15)
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn centroid(points: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let n = points[0].len();
    let mut c = vec![0.0; n];
    for &i in members {
        for (ck, pk) in c.iter_mut().zip(&points[i]) {
            *ck += pk;
        }
    }
    c.iter().map(|v| v / members.len() as f64).collect()
}

/// Lloyd iterations from a k-means++ start; returns cluster labels.
fn kmeans(points: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(KMEANS_SEED);
    let mut centers = vec![points[rng.gen_range(0..points.len())].clone()];
    while centers.len() < k {
        let d: Vec<f64> = points
            .iter()
            .map(|p| {
                centers
                    .iter()
                    .map(|c| dist2(p, c))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = d.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen_range(0.0..total);
            d.iter()
                .position(|&w| {
                    target -= w;
                    target < 0.0
                })
                .unwrap_or(points.len() - 1)
        } else {
            rng.gen_range(0..points.len())
        };
        centers.push(points[next].clone());
    }
    let nearest = |p: &[f64], centers: &[Vec<f64>]| {
        (0..centers.len())
            .min_by(|&a, &b| dist2(p, &centers[a]).total_cmp(&dist2(p, &centers[b])))
            .unwrap_or(0)
    };
    let mut labels: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
    for _ in 0..KMEANS_ITERATIONS {
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<usize> = (0..points.len()).filter(|&i| labels[i] == c).collect();
            if !members.is_empty() {
                *center = centroid(points, &members);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centers)).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    labels
}

/// Groups of point indices with at least `min_size` members each; small
/// clusters are merged into the cluster with the nearest centroid.
fn merge_small(points: &[Vec<f64>], labels: &[usize], min_size: usize) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut groups: Vec<Vec<usize>> = (0..k)
        .map(|c| (0..labels.len()).filter(|&i| labels[i] == c).collect())
        .collect();
    groups.retain(|g| !g.is_empty());
    while groups.len() > 1 {
        let Some(small) = (0..groups.len())
            .filter(|&g| groups[g].len() < min_size)
            .min_by_key(|&g| groups[g].len())
        else {
            break;
        };
        let c = centroid(points, &groups[small]);
        let target = (0..groups.len())
            .filter(|&g| g != small)
            .min_by(|&a, &b| {
                dist2(&c, &centroid(points, &groups[a]))
                    .total_cmp(&dist2(&c, &centroid(points, &groups[b])))
            })
            .unwrap_or(0);
        log::debug!(
            "merging cluster of {} points into its neighbour",
            groups[small].len()
        );
        let moved = std::mem::take(&mut groups[small]);
        groups[target].extend(moved);
        groups.remove(small);
    }
    groups
}

fn least_squares(points: &[Vec<f64>], values: &[f64], members: &[usize]) -> Result<AffineFit> {
    let n = points[0].len();
    let m = DMatrix::from_fn(members.len(), n + 1, |r, c| {
        if c < n {
            points[members[r]][c]
        } else {
            1.0
        }
    });
    let rhs = DVector::from_iterator(members.len(), members.iter().map(|&i| values[i]));
    let sol = m
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| BenchError::InvalidInput(e.to_string()))?;
    Ok(AffineFit {
        a: sol.as_slice()[..n].to_vec(),
        b: sol[n],
    })
}

/// k-means clustering (fixed seed, k-means++ start, 50 iterations), then an
/// affine least-squares fit per cluster. Needs `J ≥ k·(N+1)`.
pub fn fit_concave_regression(
    points: &[Vec<f64>],
    values: &[f64],
    k: usize,
) -> Result<ConcaveRegression> {
    let n = check_data(points, values)?;
    if k == 0 || points.len() < k * (n + 1) {
        return Err(BenchError::InvalidInput(format!(
            "{} points cannot support {k} clusters in dimension {n}",
            points.len()
        )));
    }
    let labels = kmeans(points, k);
    let fits = merge_small(points, &labels, n + 1)
        .iter()
        .map(|g| least_squares(points, values, g))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConcaveRegression { fits })
}

impl ConcaveRegression {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.fits
            .iter()
            .map(|f| f.eval(x))
            .fold(f64::INFINITY, f64::min)
    }

    /// `max t  s.t.  t ≤ a_i·x + b_i,  lo ≤ x ≤ hi`.
    pub fn maximize(&self, lo: &[f64], hi: &[f64]) -> Result<(Vec<f64>, f64)> {
        let n = lo.len();
        let mut cost = vec![0.0; n + 1];
        cost[n] = 1.0;
        let mut lp = LinearProgram::maximize(cost);
        for k in 0..n {
            lp.set_bounds(k, lo[k], hi[k]);
        }
        lp.set_free(n);
        for f in &self.fits {
            let mut row: Vec<f64> = f.a.iter().map(|a| -a).collect();
            row.push(1.0);
            lp.add_le(row, f.b);
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok((sol.x[..n].to_vec(), sol.value)),
            st => Err(BenchError::InvalidInput(format!(
                "regression maximization reported {st:?}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid_points() -> Vec<Vec<f64>> {
        (0..5)
            .flat_map(|i| (0..5).map(move |j| vec![f64::from(i), f64::from(j)]))
            .collect()
    }

    #[test]
    fn hull_levels() {
        let pts = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]];
        let pc = fit_piecewise_constant(&pts, &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!(pc.eval(&[0.0, 0.0]).unwrap(), 3.0);
        assert_eq!(pc.eval(&[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(pc.eval(&[0.5, 0.5]).unwrap(), 1.0);
        assert_eq!(pc.eval(&[2.0, 2.0]).unwrap(), f64::NEG_INFINITY);
        assert_eq!(pc.maximize(), (vec![0.0, 0.0], 3.0));
    }

    #[test]
    fn affine_data_is_recovered() {
        let pts = grid_points();
        let vals: Vec<f64> = pts.iter().map(|p| 2.0 * p[0] - p[1] + 0.5).collect();
        let fit = fit_concave_regression(&pts, &vals, 1).unwrap();
        for (p, v) in pts.iter().zip(&vals) {
            assert_abs_diff_eq!(fit.eval(p), v, epsilon = 1e-8);
        }
    }

    #[test]
    fn small_clusters_merge() {
        let mut pts = grid_points();
        pts.push(vec![100.0, 100.0]);
        let vals: Vec<f64> = pts.iter().map(|p| -(p[0] - 2.0).powi(2)).collect();
        let fit = fit_concave_regression(&pts, &vals, 3).unwrap();
        assert!(fit.fits.len() <= 3);
        let (x, v) = fit.maximize(&[0.0, 0.0], &[4.0, 4.0]).unwrap();
        assert_abs_diff_eq!(fit.eval(&x), v, epsilon = 1e-9);
    }

    #[test]
    fn cluster_count_default() {
        assert_eq!(default_cluster_count(32), 3);
        assert_eq!(default_cluster_count(128), 7);
        assert_eq!(default_cluster_count(1000), 15);
    }

    #[test]
    fn too_few_points() {
        let pts = grid_points();
        let vals = vec![0.0; pts.len()];
        assert!(fit_concave_regression(&pts, &vals, 9).is_err());
    }
}
