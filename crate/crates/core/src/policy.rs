//! Online control loops: fixed horizon control with separate forecast and
//! plan commitments, receding horizon control as its `v = 1` case, and
//! averaging fixed horizon control.
//!
//! Timing: the evaluation period is `[start, start + hours)`. Hour `start`
//! is observed without battery action; a plan solved at origin `t` controls
//! hours `t + 1 ..= t + commit`. The lookahead uses the newest forecast with
//! origin `<= t`, starting at the lead for hour `t + 1` (a stale window is
//! shortened, never padded) and is cut at the end of the period.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::battery::{score, Action, EnvironmentSeries, KpiReport, SimulationTrace, Simulator};
use crate::forecast::{generate_point_archive_from, generate_scenario_archive, NoiseModel, ScenarioGenConfig};
use crate::metrics::{evaluate_archive, mean_metrics, ArchiveMetrics};
use crate::mpc::{optimize, plan_from_solution, LookaheadProblem};
use crate::rng::Stream;
use crate::series::{ForecastArchive, ForecastKind, TimeSeries};
use crate::{Error, Result};

/// Control algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Algorithm {
    /// Fixed horizon control.
    Fhc,
    /// Averaging fixed horizon control.
    Afhc,
}

/// Evaluation period `[start, start + hours)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Period {
    /// First hour.
    pub start: i64,
    /// Number of hours.
    pub hours: usize,
}

impl Period {
    /// One past the last hour.
    pub fn end(&self) -> i64 {
        self.start + self.hours as i64
    }
}

/// Settings of one control run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyConfig {
    /// Algorithm.
    pub algorithm: Algorithm,
    /// Forecast commitment (revision interval of the archive).
    pub v_f: usize,
    /// Plan commitment.
    pub v_o: usize,
    /// Forecast horizon `H`.
    pub horizon: usize,
    /// Switching-cost weight.
    pub beta: f64,
    /// Carbon weight inside the lookahead objective.
    pub w_co2: f64,
    /// Whether the archives carry scenarios.
    pub stochastic: bool,
    /// LP tolerance.
    pub tol: f64,
    /// FHC only: the first solve commits `phase` hours instead of `v_o`
    /// (0 means no offset). AFHC uses this to build its instances.
    pub phase: usize,
    /// Evaluation period.
    pub period: Period,
}

impl PolicyConfig {
    /// FHC with the given commitments over `period`.
    pub fn fhc(v_f: usize, v_o: usize, horizon: usize, period: Period) -> Self {
        PolicyConfig {
            algorithm: Algorithm::Fhc,
            v_f,
            v_o,
            horizon,
            beta: 0.0,
            w_co2: 1.0,
            stochastic: false,
            tol: 1e-9,
            phase: 0,
            period,
        }
    }

    /// AFHC with commitment `v`.
    pub fn afhc(v: usize, horizon: usize, period: Period) -> Self {
        PolicyConfig { algorithm: Algorithm::Afhc, ..Self::fhc(v, v, horizon, period) }
    }

    /// Checks `1 <= v_o <= v_f <= horizon` and the other ranges.
    pub fn validate(&self) -> Result<()> {
        if self.v_o == 0 || self.v_o > self.v_f || self.v_f > self.horizon {
            return Err(Error::Config(format!(
                "commitments must satisfy 1 <= v_O <= v_F <= H, got v_O={}, v_F={}, H={}",
                self.v_o, self.v_f, self.horizon
            )));
        }
        if self.algorithm == Algorithm::Afhc && self.v_o != self.v_f {
            return Err(Error::Config("AFHC needs v_O = v_F".into()));
        }
        if self.phase >= self.v_o {
            return Err(Error::Config(format!("phase {} must be below v_O={}", self.phase, self.v_o)));
        }
        if !(self.beta >= 0.0) || !(self.w_co2 >= 0.0) || !(self.tol > 0.0) {
            return Err(Error::Config("beta and w_co2 must be >= 0 and tol > 0".into()));
        }
        if self.period.hours < 2 {
            return Err(Error::Config("evaluation period needs at least two hours".into()));
        }
        Ok(())
    }
}

/// Result of a control run.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    /// Executed trace over the period.
    pub trace: SimulationTrace,
    /// Origins at which lookahead problems were solved.
    pub solve_hours: Vec<i64>,
}

fn check_inputs(env: &EnvironmentSeries, archives: &[ForecastArchive], cfg: &PolicyConfig) -> Result<()> {
    cfg.validate()?;
    if archives.len() != env.n_buildings() {
        return Err(Error::SizeMismatch { left: archives.len(), right: env.n_buildings() });
    }
    let kind = if cfg.stochastic { ForecastKind::Scenario } else { ForecastKind::Point };
    for a in archives {
        if a.revision_interval() != cfg.v_f || a.horizon() != cfg.horizon {
            return Err(Error::Config(format!(
                "archive has interval {} and horizon {}, policy expects {} and {}",
                a.revision_interval(),
                a.horizon(),
                cfg.v_f,
                cfg.horizon
            )));
        }
        if a.kind() != kind {
            return Err(Error::WrongKind { expected: kind.name() });
        }
        if a.n_scenarios() != archives[0].n_scenarios() {
            return Err(Error::Config("all buildings need the same scenario count".into()));
        }
        if a.first_origin() > cfg.period.start {
            return Err(Error::Coverage { from: cfg.period.start, to: a.first_origin() });
        }
    }
    env.price.require(cfg.period.start, cfg.period.end())
}

/// Lookahead problem at origin `t` from the newest windows.
pub fn lookahead_at(
    env: &EnvironmentSeries,
    archives: &[ForecastArchive],
    cfg: &PolicyConfig,
    t: i64,
    soc: &[f64],
    prev_net_load: f64,
) -> Result<LookaheadProblem> {
    let mut base = Vec::with_capacity(archives.len());
    let mut len = 0;
    for a in archives {
        let w = a.latest_at(t).ok_or(Error::Coverage { from: t, to: t + 1 })?;
        let stale = (t - w.origin()) as usize;
        if stale >= w.horizon() {
            return Err(Error::Coverage { from: w.targets().end, to: t + 2 });
        }
        len = (w.horizon() - stale).min((cfg.period.end() - 1 - t) as usize);
        let n = w.n_scenarios();
        let mut rows = vec![Vec::with_capacity(len); n];
        for k in 0..len {
            for (j, v) in w.lead(stale + k + 1).iter().enumerate() {
                rows[j].push(*v);
            }
        }
        base.push(rows);
    }
    Ok(LookaheadProblem {
        origin: t,
        batteries: env.buildings.iter().map(|b| b.battery).collect(),
        soc0: soc.to_vec(),
        base,
        price: env.price.slice(t + 1, len)?.to_vec(),
        carbon: env.carbon.slice(t + 1, len)?.to_vec(),
        w_co2: cfg.w_co2,
        beta: cfg.beta,
        prev_net_load,
    })
}

/// Runs FHC(`v_f`, `v_o`): every `v_o` hours solve the lookahead from the
/// current SOC and commit `v_o` hours, executed against the real loads.
pub fn run_fhc(env: &EnvironmentSeries, archives: &[ForecastArchive], cfg: &PolicyConfig) -> Result<PolicyRun> {
    check_inputs(env, archives, cfg)?;
    let start = cfg.period.start;
    let end = cfg.period.end();
    let idle = vec![Action::IDLE; env.n_buildings()];
    let mut sim = Simulator::new(env, start, &env.initial_soc())?;
    sim.step(&idle)?;
    let mut solve_hours = Vec::new();
    let mut t = start;
    let mut commit = if cfg.phase > 0 { cfg.phase } else { cfg.v_o };
    while t < end - 1 {
        let problem = lookahead_at(env, archives, cfg, t, sim.soc(), sim.last_net_load().unwrap_or(0.0))?;
        let sol = optimize(&problem, cfg.tol)?;
        let c = commit.min(problem.horizon());
        let plan = plan_from_solution(&problem, &sol, c)?;
        for k in 0..c {
            sim.step(&plan.at(k))?;
        }
        solve_hours.push(t);
        t += c as i64;
        commit = cfg.v_o;
    }
    Ok(PolicyRun { trace: sim.finish(), solve_hours })
}

/// Result of an AFHC run.
#[derive(Debug, Clone, PartialEq)]
pub struct AfhcRun {
    /// Executed trace with the averaged actions.
    pub trace: SimulationTrace,
    /// The `v` phase-shifted FHC instances.
    pub phases: Vec<PolicyRun>,
}

/// Runs AFHC(`v`): `v` FHC(`v`) instances whose solves are shifted by one
/// hour each; every hour executes the equal-weight mean of their actions.
/// Each instance follows its own plan and SOC, so it equals the stand-alone
/// FHC run with the same phase.
pub fn run_afhc(env: &EnvironmentSeries, archives: &[ForecastArchive], cfg: &PolicyConfig) -> Result<AfhcRun> {
    check_inputs(env, archives, cfg)?;
    if cfg.algorithm != Algorithm::Afhc {
        return Err(Error::Config("run_afhc needs algorithm = afhc".into()));
    }
    let phases = (0..cfg.v_o)
        .map(|k| run_fhc(env, archives, &PolicyConfig { algorithm: Algorithm::Fhc, phase: k, ..*cfg }))
        .collect::<Result<Vec<_>>>()?;
    let mut sim = Simulator::new(env, cfg.period.start, &env.initial_soc())?;
    let mut buf = Vec::with_capacity(phases.len());
    for h in 0..cfg.period.hours {
        let actions: Vec<Action> = (0..env.n_buildings())
            .map(|b| {
                buf.clear();
                buf.extend(phases.iter().map(|p| p.trace.actions[b][h]));
                Action::mean(&buf)
            })
            .collect();
        sim.step(&actions)?;
    }
    Ok(AfhcRun { trace: sim.finish(), phases })
}

/// Runs the algorithm selected in `cfg` and returns the executed trace.
pub fn run_policy(env: &EnvironmentSeries, archives: &[ForecastArchive], cfg: &PolicyConfig) -> Result<SimulationTrace> {
    match cfg.algorithm {
        Algorithm::Fhc => run_fhc(env, archives, cfg).map(|r| r.trace),
        Algorithm::Afhc => run_afhc(env, archives, cfg).map(|r| r.trace),
    }
}

/// Settings of a commitment grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridConfig {
    /// Largest forecast commitment; cells cover `1 <= v_O <= v_F <= v_max`.
    pub v_max: usize,
    /// Forecast horizon `H`.
    pub horizon: usize,
    /// Switching-cost weight of the second run per cell (0 disables it).
    pub beta: f64,
    /// Carbon weight inside the lookahead objective.
    pub w_co2: f64,
    /// LP tolerance.
    pub tol: f64,
    /// Evaluation period.
    pub period: Period,
    /// Whether scores include the grid KPIs (needs whole months).
    pub include_grid: bool,
    /// Energy-score exponent.
    pub es_p: f64,
    /// Scenario generation; `None` runs deterministic FHC.
    pub scenarios: Option<ScenarioGenConfig>,
}

impl GridConfig {
    /// All `(v_F, v_O)` pairs in row-major order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        (1..=self.v_max).flat_map(|f| (1..=f).map(move |o| (f, o))).collect()
    }

    /// Policy settings of one cell.
    pub fn policy(&self, v_f: usize, v_o: usize, beta: f64) -> PolicyConfig {
        PolicyConfig {
            beta,
            w_co2: self.w_co2,
            tol: self.tol,
            stochastic: self.scenarios.is_some(),
            ..PolicyConfig::fhc(v_f, v_o, self.horizon, self.period)
        }
    }
}

/// Score of one run inside a grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellRun {
    /// Switching-cost weight used by the lookahead.
    pub beta: f64,
    /// KPI scores.
    pub kpis: KpiReport,
    /// Price plus weighted carbon plus `beta` times ramping of the trace.
    pub realized_cost: f64,
    /// Clipped actions.
    pub clips: usize,
}

/// One `(v_F, v_O)` cell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCell {
    /// Forecast commitment.
    pub v_f: usize,
    /// Plan commitment.
    pub v_o: usize,
    /// Run without switching cost.
    pub plain: CellRun,
    /// Run with switching cost, when `beta > 0`.
    pub switching: Option<CellRun>,
    /// Forecast metrics of the archive, averaged over buildings.
    pub metrics: ArchiveMetrics,
}

/// Forecast archives of every building for forecast commitment `v_f`.
/// Building `b` draws from seed `derive_seed(noise.seed, b)`, so archives of
/// different `v_f` share their innovations.
pub fn grid_archives(truths: &[TimeSeries], noise: &NoiseModel, grid: &GridConfig, v_f: usize) -> Result<Vec<ForecastArchive>> {
    let count = (grid.period.hours - 2) / v_f + 1;
    truths
        .iter()
        .enumerate()
        .map(|(b, truth)| {
            let model = NoiseModel { seed: Stream::derive_seed(noise.seed, b as u64), ..*noise };
            let point = generate_point_archive_from(truth, grid.horizon, v_f, grid.period.start, count, &model)?;
            match &grid.scenarios {
                None => Ok(point),
                Some(sc) => {
                    let cfg = ScenarioGenConfig { seed: Stream::derive_seed(sc.seed, b as u64), ..*sc };
                    generate_scenario_archive(&point, &cfg)
                }
            }
        })
        .collect()
}

/// Forecast metrics of a set of archives, averaged over buildings.
pub fn archive_set_metrics(archives: &[ForecastArchive], truths: &[TimeSeries], es_p: f64) -> Result<ArchiveMetrics> {
    let per = archives
        .iter()
        .zip(truths)
        .map(|(a, t)| evaluate_archive(a, t, es_p))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_metrics(&per))
}

/// One run of a grid cell with switching weight `beta`.
pub fn run_cell(env: &EnvironmentSeries, archives: &[ForecastArchive], grid: &GridConfig, v_f: usize, v_o: usize, beta: f64) -> Result<CellRun> {
    let cfg = grid.policy(v_f, v_o, beta);
    let trace = run_fhc(env, archives, &cfg)?.trace;
    Ok(CellRun {
        beta,
        kpis: score(&trace, env, grid.include_grid)?,
        realized_cost: trace.realized_cost(beta, grid.w_co2),
        clips: trace.clips,
    })
}

/// Runs every cell of the grid in row-major order. `truths[b]` is the net
/// base load of building `b`, which the forecasts target.
pub fn run_decision_grid(env: &EnvironmentSeries, truths: &[TimeSeries], noise: &NoiseModel, grid: &GridConfig) -> Result<Vec<GridCell>> {
    if grid.v_max == 0 || grid.v_max > grid.horizon {
        return Err(Error::Config(format!("v_max must lie in 1..=H={}, got {}", grid.horizon, grid.v_max)));
    }
    let mut cells = Vec::new();
    for v_f in 1..=grid.v_max {
        let archives = grid_archives(truths, noise, grid, v_f)?;
        let metrics = archive_set_metrics(&archives, truths, grid.es_p)?;
        for v_o in 1..=v_f {
            let plain = run_cell(env, &archives, grid, v_f, v_o, 0.0)?;
            let switching = if grid.beta > 0.0 { Some(run_cell(env, &archives, grid, v_f, v_o, grid.beta)?) } else { None };
            cells.push(GridCell { v_f, v_o, plain, switching, metrics });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::{make_synthetic_env, SyntheticEnvConfig};

    fn setup(hours: usize, horizon: usize) -> (EnvironmentSeries, Vec<TimeSeries>, Period) {
        let env = make_synthetic_env(&SyntheticEnvConfig { n_days: 2, tail_hours: horizon, ..Default::default() }).unwrap();
        let truths = vec![env.net_base(0)];
        (env, truths, Period { start: 0, hours })
    }

    fn archives(truths: &[TimeSeries], h: usize, v_f: usize, period: Period, sigma: f64) -> Vec<ForecastArchive> {
        let count = (period.hours - 2) / v_f + 1;
        truths
            .iter()
            .map(|t| generate_point_archive_from(t, h, v_f, 0, count, &NoiseModel::exp_decay(sigma, 0.8, 1.0, 3)).unwrap())
            .collect()
    }

    #[test]
    fn solves_at_commitment_multiples() {
        let (env, truths, period) = setup(30, 8);
        let a = archives(&truths, 8, 4, period, 0.2);
        let run = run_fhc(&env, &a, &PolicyConfig::fhc(4, 4, 8, period)).unwrap();
        assert_eq!(run.solve_hours, vec![0, 4, 8, 12, 16, 20, 24, 28]);
        assert_eq!(run.trace.len(), 30);
        assert_eq!(run.trace.actions[0][0], Action::IDLE);
        let run2 = run_fhc(&env, &a, &PolicyConfig::fhc(4, 2, 8, period)).unwrap();
        assert_eq!(run2.solve_hours.len(), 15);
        let shifted = run_fhc(&env, &a, &PolicyConfig { phase: 3, ..PolicyConfig::fhc(4, 4, 8, period) }).unwrap();
        assert_eq!(&shifted.solve_hours[..3], &[0, 3, 7]);
    }

    #[test]
    fn afhc_with_unit_commitment_is_rhc() {
        let (env, truths, period) = setup(20, 6);
        let a = archives(&truths, 6, 1, period, 0.3);
        let rhc = run_fhc(&env, &a, &PolicyConfig::fhc(1, 1, 6, period)).unwrap();
        let afhc = run_afhc(&env, &a, &PolicyConfig::afhc(1, 6, period)).unwrap();
        assert_eq!(rhc.trace, afhc.trace);
    }

    #[test]
    fn config_validation() {
        let p = Period { start: 0, hours: 10 };
        assert!(PolicyConfig::fhc(2, 3, 8, p).validate().is_err());
        assert!(PolicyConfig::fhc(9, 3, 8, p).validate().is_err());
        assert!(PolicyConfig { algorithm: Algorithm::Afhc, ..PolicyConfig::fhc(4, 2, 8, p) }.validate().is_err());
        assert!(PolicyConfig::fhc(4, 2, 8, p).validate().is_ok());
    }

    #[test]
    fn archive_interval_must_match() {
        let (env, truths, period) = setup(20, 6);
        let a = archives(&truths, 6, 2, period, 0.0);
        assert!(matches!(run_fhc(&env, &a, &PolicyConfig::fhc(3, 3, 6, period)), Err(Error::Config(_))));
        let short = Period { start: 0, hours: 200 };
        assert!(run_fhc(&env, &a, &PolicyConfig::fhc(2, 2, 6, short)).is_err());
    }

    #[test]
    fn grid_has_triangular_cells() {
        let (env, truths, period) = setup(12, 4);
        let grid = GridConfig {
            v_max: 2,
            horizon: 4,
            beta: 0.0,
            w_co2: 1.0,
            tol: 1e-9,
            period,
            include_grid: false,
            es_p: 1.0,
            scenarios: None,
        };
        let cells = run_decision_grid(&env, &truths, &NoiseModel::iid(0.1, 1), &grid).unwrap();
        let ids: Vec<_> = cells.iter().map(|c| (c.v_f, c.v_o)).collect();
        assert_eq!(ids, vec![(1, 1), (2, 1), (2, 2)]);
        assert!(cells.iter().all(|c| c.switching.is_none()));
    }
}
