//! Dense bounded-variable primal simplex.
//!
//! Problems have the form `min c'x` subject to `lo_r <= a_r'x <= hi_r` for
//! every row and `lo_j <= x_j <= hi_j` for every variable; any bound may be
//! infinite. Each row gets a logical variable `r = a'x` carrying the row
//! bounds, which turns the system into `[A | -I] z = 0` with bounded `z` and
//! gives the all-logical starting basis for free.
//!
//! Phase 1 minimises the sum of bound violations of the basic variables,
//! phase 2 the objective; both run on one tableau `B^-1 [A | -I]` and the
//! phase-2 reduced costs are carried through every pivot. Pricing is
//! Dantzig's rule with a switch to Bland's rule after a run of degenerate
//! pivots, or Bland's rule throughout when requested.

use alloc::vec;
use alloc::vec::Vec;

/// One constraint row `lower <= sum coeff * x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// Sparse coefficients `(variable, value)`.
    pub coeffs: Vec<(usize, f64)>,
    /// Lower bound (may be `-inf`).
    pub lower: f64,
    /// Upper bound (may be `+inf`).
    pub upper: f64,
}

/// Linear program in bounded row/column form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    costs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    /// Empty problem.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        debug_assert!(lower <= upper);
        self.costs.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.costs.len() - 1
    }

    /// Adds a row and returns its index.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, lower: f64, upper: f64) -> usize {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.costs.len()));
        self.rows.push(Row { coeffs, lower, upper });
        self.rows.len() - 1
    }

    /// Number of variables.
    pub fn n_vars(&self) -> usize {
        self.costs.len()
    }

    /// Number of rows.
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Objective coefficients.
    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Variable bounds.
    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Rows.
    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    /// Objective value at `x`.
    pub fn objective(&self, x: &[f64]) -> f64 {
        self.costs.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest bound violation of `x` over variables and rows.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let viol = |v: f64, lo: f64, hi: f64| (lo - v).max(v - hi).max(0.0);
        let vars = (0..x.len()).map(|j| viol(x[j], self.lower[j], self.upper[j]));
        let rows = self.rows.iter().map(|r| {
            let act: f64 = r.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            viol(act, r.lower, r.upper)
        });
        vars.chain(rows).fold(0.0, f64::max)
    }
}

/// Entering-variable rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest eligible index (anti-cycling, slow).
    Bland,
    /// Largest reduced cost, falling back to Bland on degenerate stalls.
    Dantzig,
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Feasibility and optimality tolerance.
    pub tol: f64,
    /// Pivot limit.
    pub max_iter: usize,
    /// Pricing rule.
    pub rule: PivotRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-9, max_iter: 50_000, rule: PivotRule::Dantzig }
    }
}

/// Termination state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LpStatus {
    /// Optimal basic solution found.
    Optimal,
    /// No feasible point.
    Infeasible,
    /// Objective unbounded below.
    Unbounded,
    /// Pivot limit reached.
    IterationLimit,
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    /// Termination state.
    pub status: LpStatus,
    /// Variable values (last iterate unless optimal).
    pub x: Vec<f64>,
    /// Objective at `x`.
    pub objective: f64,
    /// Pivots and bound flips performed.
    pub iterations: usize,
    /// Largest bound violation of `x`.
    pub max_violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum At {
    Lower,
    Upper,
    Zero,
    Basic,
}

const PIVOT_TOL: f64 = 1e-11;
const DEGENERATE_RUN: usize = 30;
const REFRESH_EVERY: usize = 64;

struct Tableau {
    m: usize,
    w: usize,
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    val: Vec<f64>,
    state: Vec<At>,
    basis: Vec<usize>,
    d: Vec<f64>,
}

impl Tableau {
    fn new(lp: &LinearProgram) -> Self {
        let (n, m) = (lp.n_vars(), lp.n_rows());
        let w = n + m;
        let mut t = vec![0.0; m * w];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                t[i * w + j] -= a;
            }
            t[i * w + n + i] = 1.0;
        }
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        lo.extend(lp.rows.iter().map(|r| r.lower));
        hi.extend(lp.rows.iter().map(|r| r.upper));
        let mut cost = lp.costs.clone();
        cost.resize(w, 0.0);
        let mut val = vec![0.0; w];
        let mut state = vec![At::Basic; w];
        for j in 0..n {
            let (l, u) = (lo[j], hi[j]);
            // start nonbasic at the bound nearest zero
            let (s, v) = if l.is_finite() && (!u.is_finite() || l.abs() <= u.abs()) {
                (At::Lower, l)
            } else if u.is_finite() {
                (At::Upper, u)
            } else {
                (At::Zero, 0.0)
            };
            state[j] = s;
            val[j] = v;
        }
        let basis = (n..w).collect();
        let mut tab = Tableau { m, w, t, lo, hi, val, state, basis, d: cost };
        tab.refresh_basic_values();
        tab
    }

    fn refresh_basic_values(&mut self) {
        for i in 0..self.m {
            let row = &self.t[i * self.w..(i + 1) * self.w];
            let mut s = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 && self.state[j] != At::Basic {
                    s -= a * self.val[j];
                }
            }
            self.val[self.basis[i]] = s;
        }
    }

    fn infeasibility(&self, i: usize, tol: f64) -> f64 {
        let k = self.basis[i];
        let v = self.val[k];
        if v < self.lo[k] - tol * (1.0 + self.lo[k].abs()) {
            -1.0
        } else if v > self.hi[k] + tol * (1.0 + self.hi[k].abs()) {
            1.0
        } else {
            0.0
        }
    }

    fn eligible(&self, j: usize, dj: f64, tol: f64) -> Option<f64> {
        match self.state[j] {
            At::Basic => None,
            _ if self.lo[j] == self.hi[j] => None,
            At::Lower if dj < -tol => Some(1.0),
            At::Upper if dj > tol => Some(-1.0),
            At::Zero if dj.abs() > tol => Some(if dj < 0.0 { 1.0 } else { -1.0 }),
            _ => None,
        }
    }

    fn solve(&mut self, opts: &SolverOptions) -> (LpStatus, usize) {
        let tol = opts.tol;
        let mut phase1_cost = vec![0.0; self.m];
        let mut d1 = vec![0.0; self.w];
        let mut degenerate = 0usize;
        let mut bland = opts.rule == PivotRule::Bland;
        for iter in 0..opts.max_iter {
            if iter > 0 && iter % REFRESH_EVERY == 0 {
                self.refresh_basic_values();
            }
            let mut phase1 = false;
            for (i, c) in phase1_cost.iter_mut().enumerate() {
                *c = self.infeasibility(i, tol);
                phase1 |= *c != 0.0;
            }
            let dvec: &[f64] = if phase1 {
                d1.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..self.m {
                    let c = phase1_cost[i];
                    if c != 0.0 {
                        let row = &self.t[i * self.w..(i + 1) * self.w];
                        for (dj, &a) in d1.iter_mut().zip(row) {
                            *dj -= c * a;
                        }
                    }
                }
                &d1
            } else {
                &self.d
            };

            // pricing
            let mut entering = None;
            let mut best = 0.0;
            for j in 0..self.w {
                if let Some(dir) = self.eligible(j, dvec[j], tol) {
                    if bland {
                        entering = Some((j, dir));
                        break;
                    }
                    if dvec[j].abs() > best {
                        best = dvec[j].abs();
                        entering = Some((j, dir));
                    }
                }
            }
            let Some((q, dir)) = entering else {
                return (if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal }, iter);
            };

            // ratio test
            let mut theta = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_alpha = 0.0f64;
            for i in 0..self.m {
                let alpha = -self.t[i * self.w + q] * dir;
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let k = self.basis[i];
                let v = self.val[k];
                let status = phase1_cost[i];
                let (limit, bound) = if alpha > 0.0 {
                    if status > 0.0 || !self.hi[k].is_finite() && status == 0.0 {
                        continue;
                    }
                    let b = if status < 0.0 { self.lo[k] } else { self.hi[k] };
                    ((b - v) / alpha, b)
                } else {
                    if status < 0.0 || !self.lo[k].is_finite() && status == 0.0 {
                        continue;
                    }
                    let b = if status > 0.0 { self.hi[k] } else { self.lo[k] };
                    ((b - v) / alpha, b)
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    None => limit < theta,
                    Some(_) if limit < theta - 1e-12 => true,
                    Some((r, _)) if limit <= theta + 1e-12 => {
                        if bland {
                            k < self.basis[r]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    }
                    _ => false,
                };
                if better {
                    theta = limit;
                    leave = Some((i, bound));
                    leave_alpha = alpha.abs();
                }
            }
            if !theta.is_finite() {
                return (LpStatus::Unbounded, iter);
            }

            if theta <= tol {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = opts.rule == PivotRule::Bland;
            }

            // move along the edge
            self.val[q] += dir * theta;
            for i in 0..self.m {
                let a = self.t[i * self.w + q];
                if a != 0.0 {
                    self.val[self.basis[i]] -= a * dir * theta;
                }
            }

            match leave {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.state[q] = At::Upper;
                        self.val[q] = self.hi[q];
                    } else {
                        self.state[q] = At::Lower;
                        self.val[q] = self.lo[q];
                    }
                }
                Some((r, bound)) => {
                    let k = self.basis[r];
                    self.val[k] = bound;
                    self.state[k] = if bound == self.lo[k] { At::Lower } else { At::Upper };
                    self.state[q] = At::Basic;
                    self.basis[r] = q;
                    self.pivot(r, q);
                }
            }
        }
        (LpStatus::IterationLimit, opts.max_iter)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.w;
        let p = self.t[r * w + q];
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for v in prow.iter_mut() {
            *v /= p;
        }
        prow[q] = 1.0;
        let nz: Vec<usize> = (0..w).filter(|&k| prow[k] != 0.0).collect();
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for &k in &nz {
                    row[k] -= f * prow[k];
                }
                row[q] = 0.0;
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for &k in &nz {
                self.d[k] -= f * prow[k];
            }
            self.d[q] = 0.0;
        }
    }
}

/// Solves `lp`. Never panics on infeasible or unbounded input; the status
/// field reports what happened.
pub fn solve(lp: &LinearProgram, opts: &SolverOptions) -> LpResult {
    let n = lp.n_vars();
    let mut tab = Tableau::new(lp);
    let (status, iterations) = tab.solve(opts);
    tab.refresh_basic_values();
    let x: Vec<f64> = tab.val[..n].to_vec();
    let objective = lp.objective(&x);
    let max_violation = lp.max_violation(&x);
    LpResult { status, x, objective, iterations, max_violation }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn single_lower_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(1.0, -INF, INF);
        lp.add_row(vec![(x, 1.0)], 3.0, INF);
        let r = solve(&lp, &SolverOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_max_problem() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-3.0, 0.0, INF);
        let y = lp.add_var(-5.0, 0.0, INF);
        lp.add_row(vec![(x, 1.0)], -INF, 4.0);
        lp.add_row(vec![(y, 2.0)], -INF, 12.0);
        lp.add_row(vec![(x, 3.0), (y, 2.0)], -INF, 18.0);
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let r = solve(&lp, &SolverOptions { rule, ..Default::default() });
            assert_eq!(r.status, LpStatus::Optimal);
            assert!((r.objective + 36.0).abs() < 1e-9);
            assert!((r.x[0] - 2.0).abs() < 1e-9 && (r.x[1] - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, 0.0, 1.0);
        lp.add_row(vec![(x, 1.0)], 2.0, INF);
        assert_eq!(solve(&lp, &SolverOptions::default()).status, LpStatus::Infeasible);

        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, INF);
        let y = lp.add_var(0.0, 0.0, INF);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], -INF, 1.0);
        assert_eq!(solve(&lp, &SolverOptions::default()).status, LpStatus::Unbounded);
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var(-1.0, 0.0, INF);
        let y = lp.add_var(-1.0, 0.0, INF);
        lp.add_row(vec![(x, 1.0), (y, 2.0)], -INF, 4.0);
        lp.add_row(vec![(x, 3.0), (y, 1.0)], -INF, 6.0);
        let r = solve(&lp, &SolverOptions { max_iter: 1, ..Default::default() });
        assert_eq!(r.status, LpStatus::IterationLimit);
    }

    #[test]
    fn degenerate_ties_are_deterministic_under_bland() {
        // Beale's cycling example in bounded form
        let mut lp = LinearProgram::new();
        let v: Vec<usize> = [-0.75, 150.0, -0.02, 6.0]
            .iter()
            .map(|&c| lp.add_var(c, 0.0, INF))
            .collect();
        lp.add_row(vec![(v[0], 0.25), (v[1], -60.0), (v[2], -0.04), (v[3], 9.0)], -INF, 0.0);
        lp.add_row(vec![(v[0], 0.5), (v[1], -90.0), (v[2], -0.02), (v[3], 3.0)], -INF, 0.0);
        lp.add_row(vec![(v[2], 1.0)], -INF, 1.0);
        let opts = SolverOptions { rule: PivotRule::Bland, ..Default::default() };
        let a = solve(&lp, &opts);
        let b = solve(&lp, &opts);
        assert_eq!(a.status, LpStatus::Optimal);
        assert!((a.objective + 0.05).abs() < 1e-9);
        assert_eq!(a, b);
        let d = solve(&lp, &SolverOptions::default());
        assert!((d.objective + 0.05).abs() < 1e-9);
    }

    #[test]
    fn ranged_rows_equalities_and_free_variables() {
        // min |x - 2| + |y + 1| via x - 2 = p1 - n1, y + 1 = p2 - n2
        let mut lp = LinearProgram::new();
        let x = lp.add_var(0.0, -INF, INF);
        let y = lp.add_var(0.0, -INF, INF);
        let p1 = lp.add_var(1.0, 0.0, INF);
        let n1 = lp.add_var(1.0, 0.0, INF);
        let p2 = lp.add_var(1.0, 0.0, INF);
        let n2 = lp.add_var(1.0, 0.0, INF);
        lp.add_row(vec![(x, 1.0), (p1, -1.0), (n1, 1.0)], 2.0, 2.0);
        lp.add_row(vec![(y, 1.0), (p2, -1.0), (n2, 1.0)], -1.0, -1.0);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], 3.0, 5.0);
        let r = solve(&lp, &SolverOptions::default());
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective - 2.0).abs() < 1e-9, "{}", r.objective);
        assert!(r.max_violation < 1e-9);
    }
}
