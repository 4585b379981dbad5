//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row gets a slack (`[0, ∞)` for `≤` rows, `[0, 0]` for equalities),
//! so the working system is `[A | I | R] (x, s, a) = b` with bounds on every
//! column. Rows whose starting residual cannot be absorbed by the slack get an
//! artificial column `a ≥ 0`; phase one drives those to zero and then fixes
//! them at `[0, 0]` for phase two.
//!
//! Pricing is Dantzig's largest reduced cost. After `3n` consecutive
//! degenerate pivots the solver switches to Bland's rule (smallest eligible
//! index on both the entering and the leaving side) until it makes progress.
//! The tableau is rebuilt from the original columns every
//! `refactor_interval` pivots and before optimality is declared.

use crate::problem::{LinearProgram, LpOptions, LpSolution, LpStatus, Sense};
use crate::LpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable parked at zero.
    Free,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

const TIE_TOL: f64 = 1e-12;

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    solve_lp_with(lp, &LpOptions::default())
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &LpOptions) -> Result<LpSolution, LpError> {
    lp.validate()?;
    solve_with_bounds(lp, &lp.lower, &lp.upper, opts)
}

/// Solve `lp` with its variable bounds replaced by `lower`/`upper`.
/// The program itself must already be validated.
pub(crate) fn solve_with_bounds(
    lp: &LinearProgram,
    lower: &[f64],
    upper: &[f64],
    opts: &LpOptions,
) -> Result<LpSolution, LpError> {
    let n = lp.num_vars();
    if lower.iter().zip(upper).any(|(lo, hi)| lo > hi) {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, n, 0));
    }
    let mut sx = Simplex::new(lp, lower, upper, opts);

    if sx.n_art > 0 {
        sx.set_phase_one_cost();
        match sx.run()? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => {
                return Err(LpError::Numerical(
                    "phase one reported an unbounded ray".into(),
                ));
            }
        }
        let infeas: f64 = (sx.first_art..sx.ncols).map(|j| sx.val[j].max(0.0)).sum();
        let scale = 1.0 + sx.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > opts.feasibility_tol * scale {
            return Ok(LpSolution::non_optimal(
                LpStatus::Infeasible,
                n,
                sx.iterations,
            ));
        }
        sx.retire_artificials()?;
    }

    sx.set_phase_two_cost(lp);
    match sx.run()? {
        PhaseEnd::Unbounded => Ok(LpSolution::non_optimal(
            LpStatus::Unbounded,
            n,
            sx.iterations,
        )),
        PhaseEnd::Optimal => sx.extract(lp, lower, upper),
    }
}

struct Simplex<'a> {
    opts: &'a LpOptions,
    m: usize,
    n: usize,
    ncols: usize,
    first_art: usize,
    n_art: usize,
    orig: Vec<f64>,
    rhs: Vec<f64>,
    tab: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    val: Vec<f64>,
    cost: Vec<f64>,
    red: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    bland_after: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &LinearProgram, lower: &[f64], upper: &[f64], opts: &'a LpOptions) -> Self {
        let n = lp.num_vars();
        let m_in = lp.ineq_rows.len();
        let m = lp.num_rows();

        let mut lo: Vec<f64> = lower.to_vec();
        let mut hi: Vec<f64> = upper.to_vec();
        let mut val = vec![0.0; n];
        let mut state = vec![VarState::AtLower; n];
        for j in 0..n {
            if lo[j].is_finite() {
                val[j] = lo[j];
            } else if hi[j].is_finite() {
                val[j] = hi[j];
                state[j] = VarState::AtUpper;
            } else {
                state[j] = VarState::Free;
            }
        }

        let rows: Vec<(&Vec<f64>, f64)> = lp
            .ineq_rows
            .iter()
            .zip(lp.ineq_rhs.iter().copied())
            .chain(lp.eq_rows.iter().zip(lp.eq_rhs.iter().copied()))
            .collect();

        // Decide, row by row, whether the slack can start basic.
        let mut art_rows: Vec<(usize, f64)> = Vec::new();
        let mut row_sign = vec![1.0; m];
        let mut basis = vec![0usize; m];
        let mut slack_val = vec![0.0; m];
        let mut slack_basic = vec![false; m];
        for (i, (row, b)) in rows.iter().enumerate() {
            let r = b - row.iter().zip(&val).map(|(a, v)| a * v).sum::<f64>();
            let is_eq = i >= m_in;
            if (!is_eq && r >= 0.0) || (is_eq && r == 0.0) {
                slack_basic[i] = true;
                slack_val[i] = r;
            } else {
                let sign = if r >= 0.0 { 1.0 } else { -1.0 };
                art_rows.push((i, sign));
                row_sign[i] = sign;
            }
        }

        let n_art = art_rows.len();
        let first_art = n + m;
        let ncols = n + m + n_art;

        for i in 0..m {
            let is_eq = i >= m_in;
            lo.push(0.0);
            hi.push(if is_eq { 0.0 } else { f64::INFINITY });
            val.push(slack_val[i]);
            state.push(if slack_basic[i] {
                VarState::Basic
            } else {
                VarState::AtLower
            });
            if slack_basic[i] {
                basis[i] = n + i;
            }
        }
        for (k, &(i, sign)) in art_rows.iter().enumerate() {
            let r = rows[i].1 - rows[i].0.iter().zip(&val).map(|(a, v)| a * v).sum::<f64>();
            lo.push(0.0);
            hi.push(f64::INFINITY);
            val.push(r * sign);
            state.push(VarState::Basic);
            basis[i] = first_art + k;
        }

        let mut orig = vec![0.0; m * ncols];
        let mut rhs = vec![0.0; m];
        for (i, (row, b)) in rows.iter().enumerate() {
            let base = i * ncols;
            orig[base..base + n].copy_from_slice(row);
            orig[base + n + i] = 1.0;
            rhs[i] = *b;
        }
        for (k, &(i, sign)) in art_rows.iter().enumerate() {
            orig[i * ncols + first_art + k] = sign;
        }

        // B = diag(row_sign), so B⁻¹ just flips the artificial rows.
        let mut tab = orig.clone();
        for i in 0..m {
            if row_sign[i] < 0.0 {
                for v in &mut tab[i * ncols..(i + 1) * ncols] {
                    *v = -*v;
                }
            }
        }

        let max_iterations = opts.max_iterations.unwrap_or(50 * (m + ncols) + 1000);
        Simplex {
            opts,
            m,
            n,
            ncols,
            first_art,
            n_art,
            orig,
            rhs,
            tab,
            basis,
            state,
            lo,
            hi,
            val,
            cost: vec![0.0; ncols],
            red: vec![0.0; ncols],
            iterations: 0,
            max_iterations,
            since_refactor: 0,
            degenerate_run: 0,
            bland_after: 3 * n.max(1),
        }
    }

    fn set_phase_one_cost(&mut self) {
        self.cost = vec![0.0; self.ncols];
        for c in &mut self.cost[self.first_art..] {
            *c = 1.0;
        }
        self.compute_reduced_costs();
    }

    fn set_phase_two_cost(&mut self, lp: &LinearProgram) {
        self.cost = vec![0.0; self.ncols];
        let flip = if lp.sense == Sense::Maximize {
            -1.0
        } else {
            1.0
        };
        for (c, &lc) in self.cost.iter_mut().zip(&lp.cost) {
            *c = flip * lc;
        }
        self.compute_reduced_costs();
        self.degenerate_run = 0;
    }

    fn compute_reduced_costs(&mut self) {
        let nc = self.ncols;
        self.red.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * nc..(i + 1) * nc];
                for (r, a) in self.red.iter_mut().zip(row) {
                    *r -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.red[b] = 0.0;
        }
    }

    fn run(&mut self) -> Result<PhaseEnd, LpError> {
        loop {
            if self.since_refactor >= self.opts.refactor_interval {
                self.refactor()?;
            }
            let bland = self.degenerate_run >= self.bland_after;
            let Some((q, dir)) = self.choose_entering(bland) else {
                if self.since_refactor > 0 {
                    // Confirm optimality on a freshly rebuilt tableau.
                    self.refactor()?;
                    continue;
                }
                return Ok(PhaseEnd::Optimal);
            };
            let (t, leave) = self.ratio_test(q, dir, bland);
            if !t.is_finite() {
                return Ok(PhaseEnd::Unbounded);
            }
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(LpError::IterationLimit(self.iterations));
            }
            if t <= TIE_TOL {
                self.degenerate_run += 1;
            } else {
                self.degenerate_run = 0;
            }
            self.step(q, dir, t, leave);
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            let d = self.red[j];
            let dir = match self.state[j] {
                VarState::Basic => continue,
                VarState::AtLower if self.hi[j] > self.lo[j] && d < -tol => 1.0,
                VarState::AtUpper if self.hi[j] > self.lo[j] && d > tol => -1.0,
                VarState::Free if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            if d.abs() > best_score {
                best_score = d.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Returns the step length and the leaving row (`None` for a bound flip
    /// of the entering variable).
    fn ratio_test(&self, q: usize, dir: f64, bland: bool) -> (f64, Option<usize>) {
        let nc = self.ncols;
        let mut best_t = self.hi[q] - self.lo[q];
        if best_t.is_nan() {
            best_t = f64::INFINITY;
        }
        let mut best_row: Option<usize> = None;
        let mut best_alpha = 0.0;
        for i in 0..self.m {
            let a = dir * self.tab[i * nc + q];
            if a.abs() <= self.opts.pivot_tol {
                continue;
            }
            let b = self.basis[i];
            let t = if a > 0.0 {
                if !self.lo[b].is_finite() {
                    continue;
                }
                (self.val[b] - self.lo[b]).max(0.0) / a
            } else {
                if !self.hi[b].is_finite() {
                    continue;
                }
                (self.hi[b] - self.val[b]).max(0.0) / -a
            };
            let better = if t < best_t - TIE_TOL {
                true
            } else if t <= best_t + TIE_TOL {
                match best_row {
                    // Ties with a bound flip keep the flip.
                    None => false,
                    Some(r) if bland => b < self.basis[r],
                    Some(_) => a.abs() > best_alpha,
                }
            } else {
                false
            };
            if better {
                best_t = t;
                best_row = Some(i);
                best_alpha = a.abs();
            }
        }
        (best_t, best_row)
    }

    fn step(&mut self, q: usize, dir: f64, t: f64, leave: Option<usize>) {
        let nc = self.ncols;
        if t > 0.0 {
            self.val[q] += dir * t;
            for i in 0..self.m {
                let a = self.tab[i * nc + q];
                if a != 0.0 {
                    self.val[self.basis[i]] -= dir * t * a;
                }
            }
        }
        match leave {
            None => {
                if dir > 0.0 {
                    self.val[q] = self.hi[q];
                    self.state[q] = VarState::AtUpper;
                } else {
                    self.val[q] = self.lo[q];
                    self.state[q] = VarState::AtLower;
                }
            }
            Some(r) => {
                let leaving = self.basis[r];
                if dir * self.tab[r * nc + q] > 0.0 {
                    self.val[leaving] = self.lo[leaving];
                    self.state[leaving] = VarState::AtLower;
                } else {
                    self.val[leaving] = self.hi[leaving];
                    self.state[leaving] = VarState::AtUpper;
                }
                self.pivot(r, q);
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.tab[r * nc + q];
        {
            let row = &mut self.tab[r * nc..(r + 1) * nc];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[q] = 1.0;
        }
        let (head, rest) = self.tab.split_at_mut(r * nc);
        let (prow, tail) = rest.split_at_mut(nc);
        for row in head.chunks_exact_mut(nc).chain(tail.chunks_exact_mut(nc)) {
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = self.red[q];
        if f != 0.0 {
            for (d, pv) in self.red.iter_mut().zip(prow.iter()) {
                *d -= f * pv;
            }
        }
        self.red[q] = 0.0;
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        self.since_refactor += 1;
    }

    /// Rebuild `B⁻¹ [A | I | R]`, the basic values and the reduced costs
    /// from the original data.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let nc = self.ncols;
        self.since_refactor = 0;
        if m == 0 {
            self.compute_reduced_costs();
            return Ok(());
        }
        let mut bmat = vec![0.0; m * m];
        for (k, &b) in self.basis.iter().enumerate() {
            for i in 0..m {
                bmat[i * m + k] = self.orig[i * nc + b];
            }
        }
        let binv = invert(&mut bmat, m)
            .ok_or_else(|| LpError::Numerical("singular basis during refactorization".into()))?;

        let mut tab = vec![0.0; m * nc];
        for i in 0..m {
            let out = &mut tab[i * nc..(i + 1) * nc];
            for k in 0..m {
                let f = binv[i * m + k];
                if f != 0.0 {
                    for (o, a) in out.iter_mut().zip(&self.orig[k * nc..(k + 1) * nc]) {
                        *o += f * a;
                    }
                }
            }
        }
        self.tab = tab;
        for i in 0..m {
            self.tab[i * nc + self.basis[i]] = 1.0;
        }

        let mut eff = self.rhs.clone();
        for j in 0..nc {
            if self.state[j] != VarState::Basic && self.val[j] != 0.0 {
                for (i, e) in eff.iter_mut().enumerate() {
                    *e -= self.orig[i * nc + j] * self.val[j];
                }
            }
        }
        for i in 0..m {
            let v: f64 = (0..m).map(|k| binv[i * m + k] * eff[k]).sum();
            self.val[self.basis[i]] = v;
        }
        self.compute_reduced_costs();
        Ok(())
    }

    /// Fix artificials at zero and pivot any that are still basic out of the
    /// basis where a structural or slack column allows it.
    fn retire_artificials(&mut self) -> Result<(), LpError> {
        let nc = self.ncols;
        for j in self.first_art..nc {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            if self.state[j] != VarState::Basic {
                self.val[j] = 0.0;
                self.state[j] = VarState::AtLower;
            }
        }
        for r in 0..self.m {
            if self.basis[r] < self.first_art {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = 1e-7;
            for j in 0..self.first_art {
                if self.state[j] == VarState::Basic {
                    continue;
                }
                let a = self.tab[r * nc + j].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(q) = best {
                let leaving = self.basis[r];
                self.val[leaving] = 0.0;
                self.state[leaving] = VarState::AtLower;
                self.pivot(r, q);
            }
        }
        self.refactor()
    }

    fn extract(
        &mut self,
        lp: &LinearProgram,
        lower: &[f64],
        upper: &[f64],
    ) -> Result<LpSolution, LpError> {
        let n = self.n;
        let x: Vec<f64> = (0..n)
            .map(|j| self.val[j].clamp(lower[j], upper[j]))
            .collect();

        // residuals are relative to the magnitude of the terms in the row
        let mut worst = 0.0f64;
        let dot = |row: &[f64]| {
            row.iter()
                .zip(&x)
                .fold((0.0, 0.0), |(s, m): (f64, f64), (a, v)| {
                    (s + a * v, m.max((a * v).abs()))
                })
        };
        for (row, b) in lp.ineq_rows.iter().zip(&lp.ineq_rhs) {
            let (ax, size) = dot(row);
            worst = worst.max((ax - b) / (1.0 + b.abs().max(size)));
        }
        for (row, d) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
            let (ax, size) = dot(row);
            worst = worst.max((ax - d).abs() / (1.0 + d.abs().max(size)));
        }
        if worst > self.opts.feasibility_tol {
            return Err(LpError::Numerical(format!(
                "optimal point violates a row by {worst:e}"
            )));
        }

        let flip = if lp.sense == Sense::Maximize {
            -1.0
        } else {
            1.0
        };
        let duals = (0..self.m).map(|i| flip * -self.red[n + i]).collect();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            value: lp.objective_value(&x),
            x,
            duals,
            iterations: self.iterations,
            nodes: 0,
        })
    }
}

/// Gauss-Jordan inverse with partial pivoting; `a` is destroyed.
fn invert(a: &mut [f64], m: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let piv =
            (col..m).max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))?;
        if a[piv * m + col].abs() < 1e-12 {
            return None;
        }
        if piv != col {
            for k in 0..m {
                a.swap(piv * m + k, col * m + k);
                inv.swap(piv * m + k, col * m + k);
            }
        }
        let p = a[col * m + col];
        for k in 0..m {
            a[col * m + k] /= p;
            inv[col * m + k] /= p;
        }
        for i in 0..m {
            if i == col {
                continue;
            }
            let f = a[i * m + col];
            if f != 0.0 {
                for k in 0..m {
                    a[i * m + k] -= f * a[col * m + k];
                    inv[i * m + k] -= f * inv[col * m + k];
                }
            }
        }
    }
    Some(inv)
}
