use crate::LpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A dense linear program
///
/// ```text
/// min / max  c·x
///      s.t.  A x ≤ b
///            E x = d
///            lo ≤ x ≤ hi
/// ```
///
/// Bounds may be infinite. Rows are stored densely; the sparse `add_*`
/// helpers only exist to make model-building code readable.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub cost: Vec<f64>,
    pub ineq_rows: Vec<Vec<f64>>,
    pub ineq_rhs: Vec<f64>,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// New program with all variables bounded below by zero.
    pub fn new(sense: Sense, cost: Vec<f64>) -> Self {
        let n = cost.len();
        Self {
            sense,
            cost,
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn minimize(cost: Vec<f64>) -> Self {
        Self::new(Sense::Minimize, cost)
    }

    pub fn maximize(cost: Vec<f64>) -> Self {
        Self::new(Sense::Maximize, cost)
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.ineq_rows.len() + self.eq_rows.len()
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) -> &mut Self {
        self.lower[var] = lo;
        self.upper[var] = hi;
        self
    }

    pub fn set_free(&mut self, var: usize) -> &mut Self {
        self.set_bounds(var, f64::NEG_INFINITY, f64::INFINITY)
    }

    /// `row · x ≤ rhs`
    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) -> usize {
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
        self.ineq_rows.len() - 1
    }

    /// `row · x ≥ rhs`, stored negated as a `≤` row.
    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) -> usize {
        let neg = row.into_iter().map(|a| -a).collect();
        self.add_le(neg, -rhs)
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) -> usize {
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
        self.eq_rows.len() - 1
    }

    pub fn add_le_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let row = self.densify(terms);
        self.add_le(row, rhs)
    }

    pub fn add_ge_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let row = self.densify(terms);
        self.add_ge(row, rhs)
    }

    pub fn add_eq_sparse(&mut self, terms: &[(usize, f64)], rhs: f64) -> usize {
        let row = self.densify(terms);
        self.add_eq(row, rhs)
    }

    fn densify(&self, terms: &[(usize, f64)]) -> Vec<f64> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in terms {
            row[j] += a;
        }
        row
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.cost.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let dot = |row: &[f64]| row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
        let mut worst = 0.0f64;
        for (row, b) in self.ineq_rows.iter().zip(&self.ineq_rhs) {
            worst = worst.max(dot(row) - b);
        }
        for (row, d) in self.eq_rows.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row) - d).abs());
        }
        for ((v, lo), hi) in x.iter().zip(&self.lower).zip(&self.upper) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        let malformed = |msg: String| Err(LpError::MalformedProgram(msg));
        if self.lower.len() != n || self.upper.len() != n {
            return malformed(format!(
                "bound vectors have lengths {}/{}, expected {n}",
                self.lower.len(),
                self.upper.len()
            ));
        }
        if self.cost.iter().any(|c| !c.is_finite()) {
            return malformed("non-finite cost coefficient".into());
        }
        let rows = self
            .ineq_rows
            .iter()
            .zip(&self.ineq_rhs)
            .chain(self.eq_rows.iter().zip(&self.eq_rhs));
        for (i, (row, rhs)) in rows.enumerate() {
            if row.len() != n {
                return malformed(format!("row {i} has width {}, expected {n}", row.len()));
            }
            if !rhs.is_finite() || row.iter().any(|a| !a.is_finite()) {
                return malformed(format!("row {i} has a non-finite coefficient"));
            }
        }
        if self.ineq_rows.len() != self.ineq_rhs.len() || self.eq_rows.len() != self.eq_rhs.len() {
            return malformed("row/rhs count mismatch".into());
        }
        for (j, (&lo, &hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if lo.is_nan()
                || hi.is_nan()
                || lo == f64::INFINITY
                || hi == f64::NEG_INFINITY
                || lo > hi
            {
                return malformed(format!("variable {j} has invalid bounds [{lo}, {hi}]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the program's own sense; `NaN` unless optimal.
    pub value: f64,
    pub x: Vec<f64>,
    /// Row multipliers, inequality rows first then equality rows. Each entry
    /// is the rate of change of the optimal value per unit increase of that
    /// row's right-hand side. Empty unless optimal; for mixed-binary solves
    /// these belong to the final leaf relaxation.
    pub duals: Vec<f64>,
    /// Simplex iterations (summed over all nodes for mixed-binary solves).
    pub iterations: usize,
    /// Branch-and-bound nodes processed; zero for plain LP solves.
    pub nodes: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub(crate) fn non_optimal(status: LpStatus, n: usize, iterations: usize) -> Self {
        Self {
            status,
            value: f64::NAN,
            x: vec![f64::NAN; n],
            duals: Vec::new(),
            iterations,
            nodes: 0,
        }
    }
}

/// Solver tolerances. The defaults are the fixed constants every caller in
/// this workspace relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct LpOptions {
    pub pivot_tol: f64,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    /// Hard cap on simplex iterations; `None` derives one from the problem size.
    pub max_iterations: Option<usize>,
    /// Recompute the basis inverse from the original columns this often.
    pub refactor_interval: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            pivot_tol: 1e-9,
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            max_iterations: None,
            refactor_interval: 50,
        }
    }
}
