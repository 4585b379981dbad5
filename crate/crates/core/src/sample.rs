//! Data samples: points in output space with lower bounds on their value.

use serde::{Deserialize, Serialize};

use crate::error::{QreError, Result};

/// Sample as supplied by the user, in arbitrary order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawSample {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub lipschitz: f64,
    #[serde(default = "default_monotone")]
    pub monotone: bool,
}

fn default_monotone() -> bool {
    true
}

impl RawSample {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<f64>, lipschitz: f64, monotone: bool) -> Self {
        Self {
            points,
            values,
            lipschitz,
            monotone,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(QreError::EmptySample);
        }
        if self.points.len() != self.values.len() {
            return Err(QreError::DimensionMismatch(format!(
                "{} points but {} values",
                self.points.len(),
                self.values.len()
            )));
        }
        let n = self.points[0].len();
        if n == 0 {
            return Err(QreError::DimensionMismatch(
                "points have dimension zero".into(),
            ));
        }
        for (i, (p, v)) in self.points.iter().zip(&self.values).enumerate() {
            if p.len() != n {
                return Err(QreError::DimensionMismatch(format!(
                    "point {i} has dimension {}, expected {n}",
                    p.len()
                )));
            }
            if !v.is_finite() || p.iter().any(|c| !c.is_finite()) {
                return Err(QreError::NonFiniteInput(format!("point {i}")));
            }
        }
        if !(self.lipschitz.is_finite() && self.lipschitz > 0.0) {
            return Err(QreError::InvalidLipschitz(self.lipschitz));
        }
        Ok(())
    }
}

/// Sample sorted by decreasing value, with the translated points
/// `θ̃ = θ − (v̂/L)·1` cached.
///
/// Level indices `j` used throughout the crate are counts: `j` refers to
/// the top-`j` points, so `1 ≤ j ≤ len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    translated: Vec<Vec<f64>>,
    order: Vec<usize>,
    lipschitz: f64,
    monotone: bool,
}

impl SortedSample {
    /// Stable sort by decreasing value. Exact duplicates (same point and
    /// value) are dropped with a warning.
    pub fn new(raw: RawSample) -> Result<Self> {
        raw.validate()?;
        let mut idx: Vec<usize> = (0..raw.values.len()).collect();
        idx.sort_by(|&a, &b| raw.values[b].total_cmp(&raw.values[a]));

        let mut order: Vec<usize> = Vec::with_capacity(idx.len());
        for i in idx {
            let dup = order
                .iter()
                .rev()
                .take_while(|&&k| raw.values[k] == raw.values[i])
                .any(|&k| raw.points[k] == raw.points[i]);
            if dup {
                log::warn!(
                    "dropping duplicate sample point {i} ({:?}, {})",
                    raw.points[i],
                    raw.values[i]
                );
            } else {
                order.push(i);
            }
        }

        let l = raw.lipschitz;
        let points: Vec<Vec<f64>> = order.iter().map(|&i| raw.points[i].clone()).collect();
        let values: Vec<f64> = order.iter().map(|&i| raw.values[i]).collect();
        let translated = points
            .iter()
            .zip(&values)
            .map(|(p, &v)| p.iter().map(|c| c - v / l).collect())
            .collect();
        Ok(Self {
            points,
            values,
            translated,
            order,
            lipschitz: l,
            monotone: raw.monotone,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn translated(&self) -> &[Vec<f64>] {
        &self.translated
    }

    /// `order()[k]` is the original position of the `k`-th sorted point.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn monotone(&self) -> bool {
        self.monotone
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values[self.len() - 1]
    }

    /// Value of the `j`-th point (1-based); `−∞` for `j = len() + 1`.
    pub fn value_at(&self, j: usize) -> f64 {
        if j > self.len() {
            f64::NEG_INFINITY
        } else {
            self.values[j - 1]
        }
    }

    /// Largest `j` with `v̂_j ≥ level`, i.e. the unique `j` with
    /// `v̂_{j+1} < level ≤ v̂_j`. Ties resolve to the largest index.
    pub fn level_index(&self, level: f64) -> Result<usize> {
        if level > self.max_value() || level.is_nan() {
            return Err(QreError::LevelAboveMax {
                level,
                max: self.max_value(),
            });
        }
        Ok(self.values.partition_point(|&v| v >= level))
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.len() {
            Err(QreError::IndexOutOfRange {
                index: j,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(QreError::DimensionMismatch(format!(
                "point has dimension {}, expected {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|c| !c.is_finite()) {
            return Err(QreError::NonFiniteInput("query point".into()));
        }
        Ok(())
    }

    /// Same sample with every point shifted by `−shift`.
    pub(crate) fn shifted(&self, shift: &[f64]) -> Self {
        let mv = |p: &Vec<f64>| p.iter().zip(shift).map(|(a, s)| a - s).collect();
        Self {
            points: self.points.iter().map(mv).collect(),
            translated: self.translated.iter().map(mv).collect(),
            values: self.values.clone(),
            order: self.order.clone(),
            lipschitz: self.lipschitz,
            monotone: self.monotone,
        }
    }

    pub fn to_raw(&self) -> RawSample {
        RawSample::new(
            self.points.clone(),
            self.values.clone(),
            self.lipschitz,
            self.monotone,
        )
    }
}

pub fn build_sorted_sample(raw: RawSample) -> Result<SortedSample> {
    SortedSample::new(raw)
}
