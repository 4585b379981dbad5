//! Decision sets and output maps of robust maximization problems.

use qre_lp::{solve_lp, LinearProgram, LpStatus};
use serde::{Deserialize, Serialize};

use crate::error::{QreError, Result};

/// `{z : A z ≤ b, lo ≤ z ≤ hi}`; bounds may be infinite.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Polyhedron {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        let p = Self { a, b, lo, hi };
        p.validate_shape()?;
        Ok(p)
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Self {
        Self {
            a: Vec::new(),
            b: Vec::new(),
            lo: vec![lo; dim],
            hi: vec![hi; dim],
        }
    }

    pub fn boxed(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(Vec::new(), Vec::new(), lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn validate_shape(&self) -> Result<()> {
        let t = self.lo.len();
        let bad = |m: String| Err(QreError::InvalidProblem(m));
        if t == 0 {
            return bad("decision dimension is zero".into());
        }
        if self.hi.len() != t {
            return bad(format!("lo has {t} entries but hi has {}", self.hi.len()));
        }
        if self.a.len() != self.b.len() {
            return bad(format!(
                "A has {} rows but b has {} entries",
                self.a.len(),
                self.b.len()
            ));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != t {
                return bad(format!(
                    "row {i} of A has width {}, expected {t}",
                    row.len()
                ));
            }
            if row
                .iter()
                .chain(std::iter::once(&self.b[i]))
                .any(|v| !v.is_finite())
            {
                return Err(QreError::NonFiniteInput(format!("row {i} of A/b")));
            }
        }
        for k in 0..t {
            if self.lo[k].is_nan() || self.hi[k].is_nan() || self.lo[k] > self.hi[k] {
                return bad(format!(
                    "invalid bounds [{}, {}] for variable {k}",
                    self.lo[k], self.hi[k]
                ));
            }
        }
        Ok(())
    }

    /// Checks the set is nonempty and bounded with one LP per direction and
    /// coordinate.
    pub fn check_bounded(&self) -> Result<()> {
        let t = self.dim();
        for k in 0..t {
            for sign in [1.0, -1.0] {
                let mut cost = vec![0.0; t];
                cost[k] = sign;
                let mut lp = LinearProgram::minimize(cost);
                self.constrain(&mut lp, 0);
                match solve_lp(&lp)?.status {
                    LpStatus::Optimal => {}
                    LpStatus::Infeasible => return Err(QreError::InfeasibleDecisionSet),
                    LpStatus::Unbounded => return Err(QreError::UnboundedDecisionSet),
                }
            }
        }
        Ok(())
    }

    /// Adds the rows and bounds of this set on the variables
    /// `offset..offset + dim()` of `lp`.
    pub fn constrain(&self, lp: &mut LinearProgram, offset: usize) {
        for k in 0..self.dim() {
            lp.set_bounds(offset + k, self.lo[k], self.hi[k]);
        }
        for (row, &b) in self.a.iter().zip(&self.b) {
            let terms: Vec<(usize, f64)> = row
                .iter()
                .enumerate()
                .map(|(k, &v)| (offset + k, v))
                .collect();
            lp.add_le_sparse(&terms, b);
        }
    }

    pub fn contains(&self, z: &[f64], tol: f64) -> bool {
        z.len() == self.dim()
            && z.iter()
                .zip(&self.lo)
                .zip(&self.hi)
                .all(|((v, lo), hi)| *v >= lo - tol && *v <= hi + tol)
            && self
                .a
                .iter()
                .zip(&self.b)
                .all(|(row, b)| row.iter().zip(z).map(|(a, v)| a * v).sum::<f64>() <= b + tol)
    }

    /// Center of the largest Euclidean ball inside the set.
    pub fn chebyshev_center(&self) -> Result<Vec<f64>> {
        let t = self.dim();
        let r = t;
        let mut cost = vec![0.0; t + 1];
        cost[r] = 1.0;
        let mut lp = LinearProgram::maximize(cost);
        self.constrain(&mut lp, 0);
        for k in 0..t {
            if self.lo[k].is_finite() {
                lp.add_ge_sparse(&[(k, 1.0), (r, -1.0)], self.lo[k]);
            }
            if self.hi[k].is_finite() {
                lp.add_le_sparse(&[(k, 1.0), (r, 1.0)], self.hi[k]);
            }
        }
        for (row, &b) in self.a.iter().zip(&self.b) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            let mut terms: Vec<(usize, f64)> =
                row.iter().enumerate().map(|(k, &v)| (k, v)).collect();
            terms.push((r, norm));
            lp.add_le_sparse(&terms, b);
        }
        let sol = solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(sol.x[..t].to_vec()),
            LpStatus::Infeasible => Err(QreError::InfeasibleDecisionSet),
            LpStatus::Unbounded => Err(QreError::UnboundedDecisionSet),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub a: Vec<f64>,
    pub beta: f64,
}

/// Concave piecewise-linear map `g(z) = min_i (a_i·z + β_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PwlComponent {
    pub pieces: Vec<AffinePiece>,
}

impl PwlComponent {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.pieces
            .iter()
            .map(|p| p.a.iter().zip(z).map(|(a, v)| a * v).sum::<f64>() + p.beta)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OutputMap {
    Identity,
    Components(Vec<PwlComponent>),
}

/// `max_{z ∈ Z} ψ(G(z))` data: the decision set and the output map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct RobustProblem {
    pub domain: Polyhedron,
    pub output: OutputMap,
}

impl RobustProblem {
    /// Validates shapes and checks the decision set is nonempty and bounded.
    pub fn new(domain: Polyhedron, output: OutputMap) -> Result<Self> {
        domain.validate_shape()?;
        if let OutputMap::Components(comps) = &output {
            if comps.is_empty() {
                return Err(QreError::InvalidProblem(
                    "output map has no components".into(),
                ));
            }
            for (n, c) in comps.iter().enumerate() {
                if c.pieces.is_empty() {
                    return Err(QreError::InvalidProblem(format!(
                        "component {n} has no pieces"
                    )));
                }
                for p in &c.pieces {
                    if p.a.len() != domain.dim() {
                        return Err(QreError::InvalidProblem(format!(
                            "component {n} has a piece of width {}, expected {}",
                            p.a.len(),
                            domain.dim()
                        )));
                    }
                    if !p.beta.is_finite() || p.a.iter().any(|v| !v.is_finite()) {
                        return Err(QreError::NonFiniteInput(format!("component {n}")));
                    }
                }
            }
        }
        domain.check_bounded()?;
        Ok(Self { domain, output })
    }

    /// Reads the JSON problem format, keeping infeasibility and
    /// unboundedness distinct from syntax errors.
    pub fn from_reader<R: std::io::Read>(r: R) -> Result<Self> {
        let f: ProblemFile =
            serde_json::from_reader(r).map_err(|e| QreError::InvalidProblem(e.to_string()))?;
        f.try_into()
    }

    pub fn identity(domain: Polyhedron) -> Result<Self> {
        Self::new(domain, OutputMap::Identity)
    }

    pub fn decision_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn output_dim(&self) -> usize {
        match &self.output {
            OutputMap::Identity => self.domain.dim(),
            OutputMap::Components(c) => c.len(),
        }
    }

    pub fn is_affine(&self) -> bool {
        match &self.output {
            OutputMap::Identity => true,
            OutputMap::Components(c) => c.iter().all(|g| g.pieces.len() == 1),
        }
    }

    pub fn apply(&self, z: &[f64]) -> Vec<f64> {
        match &self.output {
            OutputMap::Identity => z.to_vec(),
            OutputMap::Components(c) => c.iter().map(|g| g.eval(z)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemFile {
    #[serde(rename = "T")]
    t: usize,
    #[serde(rename = "A", default)]
    a: Vec<Vec<f64>>,
    #[serde(default)]
    b: Vec<f64>,
    #[serde(default)]
    lo: Option<Vec<Option<f64>>>,
    #[serde(default)]
    hi: Option<Vec<Option<f64>>>,
    #[serde(rename = "G", default = "identity_spec")]
    g: OutputSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum OutputSpec {
    Named(String),
    Components(Vec<PwlComponent>),
}

fn identity_spec() -> OutputSpec {
    OutputSpec::Named("identity".into())
}

fn read_bounds(
    v: Option<Vec<Option<f64>>>,
    t: usize,
    missing: f64,
    name: &str,
) -> Result<Vec<f64>> {
    match v {
        None => Ok(vec![missing; t]),
        Some(v) if v.len() == t => Ok(v.into_iter().map(|b| b.unwrap_or(missing)).collect()),
        Some(v) => Err(QreError::InvalidProblem(format!(
            "{name} has {} entries, expected {t}",
            v.len()
        ))),
    }
}

impl TryFrom<ProblemFile> for RobustProblem {
    type Error = QreError;

    fn try_from(f: ProblemFile) -> Result<Self> {
        let lo = read_bounds(f.lo, f.t, f64::NEG_INFINITY, "lo")?;
        let hi = read_bounds(f.hi, f.t, f64::INFINITY, "hi")?;
        let domain = Polyhedron {
            a: f.a,
            b: f.b,
            lo,
            hi,
        };
        let output = match f.g {
            OutputSpec::Named(name) if name == "identity" => OutputMap::Identity,
            OutputSpec::Named(name) => {
                return Err(QreError::InvalidProblem(format!(
                    "unknown output map `{name}`"
                )))
            }
            OutputSpec::Components(c) => OutputMap::Components(c),
        };
        RobustProblem::new(domain, output)
    }
}

impl From<RobustProblem> for ProblemFile {
    fn from(p: RobustProblem) -> Self {
        let finite = |v: &[f64]| v.iter().map(|b| b.is_finite().then_some(*b)).collect();
        ProblemFile {
            t: p.domain.dim(),
            lo: Some(finite(&p.domain.lo)),
            hi: Some(finite(&p.domain.hi)),
            a: p.domain.a,
            b: p.domain.b,
            g: match p.output {
                OutputMap::Identity => identity_spec(),
                OutputMap::Components(c) => OutputSpec::Components(c),
            },
        }
    }
}

impl std::fmt::Display for OutputMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OutputMap::Identity => write!(f, "identity"),
            OutputMap::Components(c) => write!(f, "{} piecewise-linear components", c.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_interval_center() {
        let p = Polyhedron::cube(1, 0.0, 1.0);
        assert!((p.chebyshev_center().unwrap()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_and_unbounded_sets() {
        let empty = Polyhedron::new(vec![vec![1.0]], vec![-1.0], vec![0.0], vec![1.0]).unwrap();
        assert_eq!(
            RobustProblem::identity(empty).unwrap_err(),
            QreError::InfeasibleDecisionSet
        );
        let open = Polyhedron::new(vec![], vec![], vec![0.0], vec![f64::INFINITY]).unwrap();
        assert_eq!(
            RobustProblem::identity(open).unwrap_err(),
            QreError::UnboundedDecisionSet
        );
    }

    #[test]
    fn json_schema() {
        let text = r#"{"T": 2, "A": [[1, 1]], "b": [3], "lo": [0, 0], "hi": [2, null],
                       "G": [{"pieces": [{"a": [1, 0], "beta": 0}, {"a": [0, 0], "beta": 1.5}]},
                             {"pieces": [{"a": [0, 1], "beta": 0.5}]}]}"#;
        let p: RobustProblem = serde_json::from_str(text).unwrap();
        assert_eq!(p.output_dim(), 2);
        assert!(!p.is_affine());
        assert_eq!(p.apply(&[2.0, 1.0]), vec![1.5, 1.5]);
        let back: RobustProblem =
            serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);

        let id: RobustProblem =
            serde_json::from_str(r#"{"T":1,"lo":[0],"hi":[1],"G":"identity"}"#).unwrap();
        assert_eq!(id.output, OutputMap::Identity);
    }
}
