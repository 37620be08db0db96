//! Lookahead problem as a linear program.
//!
//! Variables per building and lookahead hour: `x_pos in [0, p_max]` and
//! `x_neg in [-p_max, 0]`, shared by all scenarios. District net load of
//! scenario `i` is `e_i = base_i + sum_b (x_pos + x_neg)` and enters the rows
//! directly. Per scenario and hour an auxiliary `u >= max(0, kappa * e_i)`
//! with `kappa = price + w_co2 * carbon` carries the energy cost, and with
//! `beta > 0` an auxiliary `s >= |e_i(t') - e_i(t'-1)|` carries the
//! switching cost, the first difference anchored at the last executed net
//! load. The objective is `sum_i W_i sum_t' (u + beta * s)` with `W_i = 1/N`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::battery::{Action, BatterySpec, Plan};
use crate::lp::{self, LinearProgram, LpStatus, SolverOptions};
use crate::{Error, Result};

/// One lookahead optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct LookaheadProblem {
    /// Decision origin; the first planned hour is `origin + 1`.
    pub origin: i64,
    /// Battery of every building.
    pub batteries: Vec<BatterySpec>,
    /// State of charge of every building at the origin.
    pub soc0: Vec<f64>,
    /// `base[b][i][k]`: net base load (load minus PV) of building `b` in
    /// scenario `i` at lookahead hour `k`.
    pub base: Vec<Vec<Vec<f64>>>,
    /// Price over the lookahead hours.
    pub price: Vec<f64>,
    /// Carbon intensity over the lookahead hours.
    pub carbon: Vec<f64>,
    /// Carbon weight inside the objective.
    pub w_co2: f64,
    /// Switching-cost weight.
    pub beta: f64,
    /// Executed district net load at the origin.
    pub prev_net_load: f64,
}

impl LookaheadProblem {
    /// Lookahead length `H'`.
    pub fn horizon(&self) -> usize {
        self.price.len()
    }

    /// Number of scenarios `N`.
    pub fn n_scenarios(&self) -> usize {
        self.base.first().map_or(0, Vec::len)
    }

    /// Number of buildings.
    pub fn n_buildings(&self) -> usize {
        self.batteries.len()
    }

    /// District net base load of scenario `i` at lookahead hour `k`.
    pub fn district_base(&self, i: usize, k: usize) -> f64 {
        self.base.iter().map(|b| b[i][k]).sum()
    }

    /// Checks shapes and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let h = self.horizon();
        let n = self.n_scenarios();
        let nb = self.n_buildings();
        if h == 0 || n == 0 || nb == 0 {
            return Err(Error::Invalid("lookahead needs at least one hour, scenario and building".into()));
        }
        if self.carbon.len() != h || self.soc0.len() != nb || self.base.len() != nb {
            return Err(Error::Invalid("lookahead series have inconsistent shapes".into()));
        }
        if self.base.iter().any(|b| b.len() != n || b.iter().any(|s| s.len() != h)) {
            return Err(Error::Invalid("scenario matrices must all be N x H'".into()));
        }
        if !(self.beta >= 0.0) || !(self.w_co2 >= 0.0) || !self.prev_net_load.is_finite() {
            return Err(Error::Invalid(format!("beta {} and w_co2 {} must be non-negative", self.beta, self.w_co2)));
        }
        let finite = self.base.iter().flatten().flatten().chain(&self.price).chain(&self.carbon);
        if finite.clone().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("lookahead data must be finite".into()));
        }
        for bat in &self.batteries {
            bat.validate()?;
        }
        Ok(())
    }
}

/// A built lookahead LP with the index layout needed to read it back.
#[derive(Debug, Clone, PartialEq)]
pub struct LookaheadLp {
    /// The program.
    pub lp: LinearProgram,
    n_buildings: usize,
    horizon: usize,
    p_max: Vec<f64>,
    u0: usize,
    s0: Option<usize>,
}

impl LookaheadLp {
    /// Index of `x_pos` for building `b`, hour `k`; `x_neg` follows it.
    pub fn action_index(&self, b: usize, k: usize) -> usize {
        2 * (b * self.horizon + k)
    }

    /// Number of action variables.
    pub fn n_action_vars(&self) -> usize {
        2 * self.n_buildings * self.horizon
    }

    /// Number of auxiliary variables.
    pub fn n_aux_vars(&self) -> usize {
        self.lp.n_vars() - self.n_action_vars()
    }

    /// Whether switching auxiliaries were emitted.
    pub fn has_switching(&self) -> bool {
        self.s0.is_some()
    }

    /// Sum of the switching auxiliaries at `x`, averaged over scenarios.
    pub fn switching_total(&self, x: &[f64]) -> f64 {
        match self.s0 {
            Some(s0) => {
                let n_aux = x.len() - s0;
                let n = n_aux / self.horizon;
                x[s0..].iter().sum::<f64>() / n as f64
            }
            None => 0.0,
        }
    }

    /// Point with all actions zero and the auxiliaries at their minimum.
    pub fn zero_action_point(&self, problem: &LookaheadProblem) -> Vec<f64> {
        let mut x = vec![0.0; self.lp.n_vars()];
        let h = self.horizon;
        for i in 0..problem.n_scenarios() {
            let mut prev = problem.prev_net_load;
            for k in 0..h {
                let e = problem.district_base(i, k);
                x[self.u0 + i * h + k] = (kappa(problem, k) * e).max(0.0);
                if let Some(s0) = self.s0 {
                    x[s0 + i * h + k] = (e - prev).abs();
                }
                prev = e;
            }
        }
        x
    }
}

fn kappa(p: &LookaheadProblem, k: usize) -> f64 {
    p.price[k] + p.w_co2 * p.carbon[k]
}

/// Builds the LP of `problem`.
pub fn build_lp(problem: &LookaheadProblem) -> Result<LookaheadLp> {
    problem.validate()?;
    let h = problem.horizon();
    let n = problem.n_scenarios();
    let w = 1.0 / n as f64;
    let mut lp = LinearProgram::new();
    for bat in &problem.batteries {
        for _ in 0..h {
            lp.add_var(0.0, 0.0, bat.p_max);
            lp.add_var(0.0, -bat.p_max, 0.0);
        }
    }
    let u0 = lp.n_vars();
    for _ in 0..n * h {
        lp.add_var(w, 0.0, f64::INFINITY);
    }
    let s0 = (problem.beta > 0.0).then(|| {
        let s0 = lp.n_vars();
        for _ in 0..n * h {
            lp.add_var(w * problem.beta, 0.0, f64::INFINITY);
        }
        s0
    });
    let nb = problem.n_buildings();
    let act = |b: usize, k: usize| 2 * (b * h + k);

    for (b, bat) in problem.batteries.iter().enumerate() {
        let soc0 = problem.soc0[b].clamp(bat.soc_min, bat.soc_max);
        let mut coeffs = Vec::with_capacity(2 * h);
        for k in 0..h {
            coeffs.push((act(b, k), bat.eta_charge));
            coeffs.push((act(b, k) + 1, 1.0 / bat.eta_discharge));
            lp.add_row(coeffs.clone(), bat.soc_min - soc0, bat.soc_max - soc0);
        }
    }

    let total = |k: usize, scale: f64, out: &mut Vec<(usize, f64)>| {
        for b in 0..nb {
            out.push((act(b, k), scale));
            out.push((act(b, k) + 1, scale));
        }
    };
    for i in 0..n {
        for k in 0..h {
            let kap = kappa(problem, k);
            let mut row = vec![(u0 + i * h + k, 1.0)];
            if kap != 0.0 {
                total(k, -kap, &mut row);
            }
            lp.add_row(row, kap * problem.district_base(i, k), f64::INFINITY);
        }
        if let Some(s0) = s0 {
            for k in 0..h {
                let prev = if k == 0 { problem.prev_net_load } else { problem.district_base(i, k - 1) };
                let diff = problem.district_base(i, k) - prev;
                for sign in [1.0, -1.0] {
                    let mut row = vec![(s0 + i * h + k, 1.0)];
                    total(k, -sign, &mut row);
                    if k > 0 {
                        total(k - 1, sign, &mut row);
                    }
                    lp.add_row(row, sign * diff, f64::INFINITY);
                }
            }
        }
    }
    Ok(LookaheadLp {
        lp,
        n_buildings: nb,
        horizon: h,
        p_max: problem.batteries.iter().map(|b| b.p_max).collect(),
        u0,
        s0,
    })
}

/// Optimised first-stage actions.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// `actions[b][k]` for building `b`, lookahead hour `k`.
    pub actions: Vec<Vec<Action>>,
    /// Objective value.
    pub objective: f64,
    /// Solver termination state.
    pub status: LpStatus,
    /// Raw variable values.
    pub x: Vec<f64>,
}

/// Solves a built lookahead LP.
pub fn solve_lp(lp: &LookaheadLp, tol: f64) -> LpSolution {
    let res = lp::solve(&lp.lp, &SolverOptions { tol, ..SolverOptions::default() });
    let actions = (0..lp.n_buildings)
        .map(|b| {
            let pm = lp.p_max[b];
            (0..lp.horizon)
                .map(|k| {
                    let j = lp.action_index(b, k);
                    Action { charge: res.x[j].clamp(0.0, pm), discharge: res.x[j + 1].clamp(-pm, 0.0) }
                })
                .collect()
        })
        .collect();
    LpSolution { actions, objective: res.objective, status: res.status, x: res.x }
}

/// Builds and solves `problem`, failing unless the solve is optimal.
pub fn optimize(problem: &LookaheadProblem, tol: f64) -> Result<LpSolution> {
    let lp = build_lp(problem)?;
    let sol = solve_lp(&lp, tol);
    if sol.status != LpStatus::Optimal {
        return Err(Error::Solver(format!("lookahead at hour {} ended {:?}", problem.origin, sol.status)));
    }
    Ok(sol)
}

/// First `commit_v` planned hours as an executable plan starting at
/// `origin + 1`.
pub fn plan_from_solution(problem: &LookaheadProblem, solution: &LpSolution, commit_v: usize) -> Result<Plan> {
    let h = problem.horizon();
    if commit_v == 0 || commit_v > h {
        return Err(Error::Commitment { requested: commit_v, horizon: h });
    }
    Ok(Plan {
        start: problem.origin + 1,
        actions: solution.actions.iter().map(|a| a[..commit_v].to_vec()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bat() -> BatterySpec {
        BatterySpec { capacity: 4.0, soc_min: 0.0, soc_max: 4.0, p_max: 2.0, eta_charge: 1.0, eta_discharge: 1.0, initial_soc: 0.0 }
    }

    fn problem(base: Vec<Vec<f64>>, price: Vec<f64>, beta: f64) -> LookaheadProblem {
        let h = price.len();
        LookaheadProblem {
            origin: 0,
            batteries: vec![bat()],
            soc0: vec![0.0],
            base: vec![base],
            price,
            carbon: vec![0.0; h],
            w_co2: 1.0,
            beta,
            prev_net_load: 0.0,
        }
    }

    #[test]
    fn variable_layout() {
        let lp = build_lp(&problem(vec![vec![1.0]], vec![1.0], 0.0)).unwrap();
        assert_eq!(lp.n_action_vars(), 2);
        assert_eq!(lp.n_aux_vars(), 1);
        assert!(!lp.has_switching());
        assert_eq!(lp.lp.n_rows(), 2);
        let p3 = problem(vec![vec![1.0, 2.0]; 3], vec![1.0, 1.0], 0.5);
        let lp3 = build_lp(&p3).unwrap();
        assert_eq!(lp3.n_action_vars(), 4);
        assert_eq!(lp3.n_aux_vars(), 2 * 3 * 2);
    }

    #[test]
    fn charge_is_deferred_to_cheap_hour() {
        let mut p = problem(vec![vec![1.0, 1.0, 1.0]], vec![1.0, 0.1, 1.0], 0.0);
        p.batteries[0].p_max = 1.0;
        let sol = optimize(&p, 1e-9).unwrap();
        assert_eq!(sol.actions[0][0].net(), 0.0);
        assert!((sol.actions[0][1].net() - 1.0).abs() < 1e-9);
        assert!((sol.actions[0][2].net() + 1.0).abs() < 1e-9);
        assert!((sol.objective - 1.2).abs() < 1e-9);
    }

    #[test]
    fn zero_action_is_feasible() {
        let mut p = problem(vec![vec![1.0, -2.0, 3.0]], vec![0.3, 0.1, 0.2], 0.7);
        p.soc0 = vec![2.5];
        let lp = build_lp(&p).unwrap();
        let x = lp.zero_action_point(&p);
        assert!(lp.lp.max_violation(&x) < 1e-12);
    }

    #[test]
    fn commitment_bounds() {
        let p = problem(vec![vec![1.0, 1.0]], vec![1.0, 1.0], 0.0);
        let sol = optimize(&p, 1e-9).unwrap();
        assert_eq!(plan_from_solution(&p, &sol, 2).unwrap().len(), 2);
        let one = plan_from_solution(&p, &sol, 1).unwrap();
        assert_eq!((one.start, one.len()), (1, 1));
        assert!(matches!(plan_from_solution(&p, &sol, 3), Err(Error::Commitment { requested: 3, horizon: 2 })));
        assert!(plan_from_solution(&p, &sol, 0).is_err());
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let mut p = problem(vec![vec![1.0]], vec![1.0], 0.0);
        p.beta = -1.0;
        assert!(build_lp(&p).is_err());
        let q = problem(vec![vec![1.0, 2.0]], vec![1.0], 0.0);
        assert!(build_lp(&q).is_err());
    }
}
