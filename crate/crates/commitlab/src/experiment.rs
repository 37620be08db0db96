//! Experiment recipes behind the CLI verbs.

use std::path::Path;

use commitlab_core::battery::{make_synthetic_env, score, EnvironmentSeries, KpiReport, SimulationTrace};
use commitlab_core::bounds::{tradeoff_curve, BoundParams, TradeoffCurve, EXPDECAY_FORM};
use commitlab_core::forecast::{sigma_for_mae, NoiseModel, ScenarioGenConfig};
use commitlab_core::metrics::{pearson, ArchiveMetrics};
use commitlab_core::policy::{
    archive_set_metrics, grid_archives, run_afhc, run_cell, run_fhc, Algorithm, CellRun, GridCell, GridConfig, Period, PolicyConfig,
};
use commitlab_core::rng::PRNG_NAME;
use commitlab_core::series::{ForecastArchive, ForecastKind, TimeSeries};
use commitlab_core::HOURS_PER_MONTH;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{salt, EnvSource, ExperimentConfig, ForecastSource};
use crate::data;
use crate::error::{AppError, Result};

/// Version stamp written into JSON outputs.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment, forecast targets and resolved settings shared by recipes.
#[derive(Debug, Clone)]
pub struct Prepared {
    /// Environment.
    pub env: EnvironmentSeries,
    /// Net base load per building: the forecast targets.
    pub truths: Vec<TimeSeries>,
    /// Evaluation period.
    pub period: Period,
    /// Mean building load over the period.
    pub mean_load: f64,
    /// Forecast noise with the resolved error scale.
    pub noise: NoiseModel,
}

/// Builds or reads the environment.
pub fn load_env(cfg: &ExperimentConfig) -> Result<EnvironmentSeries> {
    match cfg.env.source {
        EnvSource::Synthetic => Ok(make_synthetic_env(&cfg.synthetic())?),
        EnvSource::Csv => {
            let (e, d) = (cfg.env.env_csv.as_ref(), cfg.env.district_csv.as_ref());
            let (e, d) = e.zip(d).ok_or_else(|| AppError::Config("env.source = \"csv\" needs env_csv and district_csv".into()))?;
            data::read_env(e, d, cfg.battery)
        }
    }
}

/// Evaluation period: `scoring.hours` from `scoring.start`, or every whole
/// month (every hour without grid KPIs) that leaves room for the forecast
/// horizon after the last decision.
pub fn resolve_period(cfg: &ExperimentConfig, env: &EnvironmentSeries) -> Result<Period> {
    let start = cfg.scoring.start;
    let h = cfg.policy.horizon as i64;
    let avail = env.end() - h + 1 - start;
    if start < env.start() || avail < 2 {
        return Err(AppError::Data(format!(
            "environment covers hours {}..{}, too short for start {start} and horizon {h}",
            env.start(),
            env.end()
        )));
    }
    let avail = avail as usize;
    let hours = match cfg.scoring.hours {
        0 if cfg.scoring.include_grid => avail / HOURS_PER_MONTH * HOURS_PER_MONTH,
        0 => avail,
        n => n,
    };
    if hours > avail {
        return Err(AppError::Data(format!("{hours} evaluation hours requested, the environment allows {avail}")));
    }
    if cfg.scoring.include_grid && (hours == 0 || !hours.is_multiple_of(HOURS_PER_MONTH)) {
        return Err(AppError::Data(format!(
            "grid KPIs need whole {HOURS_PER_MONTH}-hour months; {hours} hours available (disable scoring.include_grid for shorter runs)"
        )));
    }
    Ok(Period { start, hours })
}

/// Loads the environment and resolves period and noise.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let env = load_env(cfg)?;
    let period = resolve_period(cfg, &env)?;
    let truths: Vec<TimeSeries> = (0..env.n_buildings()).map(|b| env.net_base(b)).collect();
    let mut total = 0.0;
    for b in &env.buildings {
        total += b.load.slice(period.start, period.hours)?.iter().sum::<f64>() / period.hours as f64;
    }
    let mean_load = total / env.n_buildings() as f64;
    let kind = cfg.forecast.kind();
    let sigma = cfg
        .forecast
        .sigma
        .unwrap_or_else(|| sigma_for_mae(kind, cfg.policy.horizon, cfg.forecast.target_mae_fraction * mean_load));
    let noise = NoiseModel { kind, sigma, seed: cfg.sub_seed(salt::FORECAST) };
    Ok(Prepared { env, truths, period, mean_load, noise })
}

/// Grid settings of the configuration.
pub fn grid_config(cfg: &ExperimentConfig, period: Period, stochastic: bool) -> GridConfig {
    let p = &cfg.policy;
    GridConfig {
        v_max: p.v_max,
        horizon: p.horizon,
        beta: p.beta,
        w_co2: p.w_co2,
        tol: p.tol,
        period,
        include_grid: cfg.scoring.include_grid,
        es_p: cfg.scoring.es_p,
        scenarios: stochastic.then(|| ScenarioGenConfig {
            n_scenarios: p.n_scenarios,
            noise_scale: p.noise_scale,
            seed: cfg.sub_seed(salt::SCENARIOS),
        }),
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    let pool = b.build().map_err(|e| AppError::Config(format!("worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs the given `(v_F, v_O)` cells in parallel; results keep the input
/// order.
pub fn run_cells(prep: &Prepared, grid: &GridConfig, cells: &[(usize, usize)], workers: usize) -> Result<Vec<GridCell>> {
    let mut rows: Vec<usize> = cells.iter().map(|c| c.0).collect();
    rows.sort_unstable();
    rows.dedup();
    with_pool(workers, || -> Result<Vec<GridCell>> {
        let archives: Vec<(usize, Vec<ForecastArchive>, ArchiveMetrics)> = rows
            .par_iter()
            .map(|&v_f| {
                let a = grid_archives(&prep.truths, &prep.noise, grid, v_f)?;
                let m = archive_set_metrics(&a, &prep.truths, grid.es_p)?;
                Ok((v_f, a, m))
            })
            .collect::<Result<_>>()?;
        let lookup = |v_f: usize| archives.iter().find(|a| a.0 == v_f).expect("row prepared");
        let mut tasks: Vec<(usize, usize, f64)> = Vec::new();
        for &(f, o) in cells {
            tasks.push((f, o, 0.0));
            if grid.beta > 0.0 {
                tasks.push((f, o, grid.beta));
            }
        }
        let runs: Vec<CellRun> = tasks
            .par_iter()
            .map(|&(f, o, beta)| Ok(run_cell(&prep.env, &lookup(f).1, grid, f, o, beta)?))
            .collect::<Result<_>>()?;
        let per = if grid.beta > 0.0 { 2 } else { 1 };
        Ok(cells
            .iter()
            .enumerate()
            .map(|(k, &(v_f, v_o))| GridCell {
                v_f,
                v_o,
                plain: runs[per * k],
                switching: (per == 2).then(|| runs[per * k + 1]),
                metrics: lookup(v_f).2,
            })
            .collect())
    })?
}

/// Score of the switching-cost run (grid KPIs included when scored).
pub fn switching_score(run: &CellRun) -> f64 {
    run.kpis.avg_score_with_grid.unwrap_or(run.kpis.avg_score)
}

/// One cell of `results.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    /// Forecast commitment.
    pub v_f: usize,
    /// Plan commitment.
    pub v_o: usize,
    /// `avg_score` of the run without switching cost.
    pub score: f64,
    /// Score of the run with switching cost.
    pub score_switching: Option<f64>,
    /// Lowest `score` of its row.
    pub best_in_row: bool,
    /// Lowest `score_switching` of its row.
    pub best_in_row_switching: bool,
    /// Run without switching cost.
    pub plain: CellRun,
    /// Run with switching cost.
    pub switching: Option<CellRun>,
    /// Forecast metrics of the row's archive.
    pub metrics: ArchiveMetrics,
}

/// One commitment grid of `results.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridTable {
    /// `point` or `scenario`.
    pub forecast_kind: String,
    /// Names of the accuracy, vertical and horizontal metrics.
    pub metric_names: [String; 3],
    /// Cells in row-major `(v_F, v_O)` order.
    pub cells: Vec<CellReport>,
}

/// Contents of `results.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResults {
    /// Producing tool.
    pub tool: String,
    /// Tool version.
    pub version: String,
    /// Random number generator.
    pub prng: String,
    /// Configuration used.
    pub config: ExperimentConfig,
    /// Evaluation period.
    pub period: Period,
    /// Mean building load over the period.
    pub mean_load: f64,
    /// Resolved forecast error scale.
    pub sigma: f64,
    /// Deterministic FHC grid.
    pub deterministic: GridTable,
    /// Scenario-based FHC grid.
    pub stochastic: Option<GridTable>,
}

fn metric_names(kind: ForecastKind) -> [String; 3] {
    match kind {
        ForecastKind::Point => ["mae", "mac_v", "mac_h"],
        ForecastKind::Scenario => ["es", "emd_v", "emd_h"],
    }
    .map(String::from)
}

// Smallest v_O reaching the row minimum.
fn row_best(cells: &[GridCell], v_f: usize, key: &dyn Fn(&GridCell) -> Option<f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for c in cells.iter().filter(|c| c.v_f == v_f) {
        if let Some(s) = key(c) {
            if best.is_none_or(|b| s < b.1) {
                best = Some((c.v_o, s));
            }
        }
    }
    best.map(|b| b.0)
}

fn mark_rows(cells: &[GridCell]) -> Vec<CellReport> {
    let plain = |c: &GridCell| Some(c.plain.kpis.avg_score);
    let switching = |c: &GridCell| c.switching.as_ref().map(switching_score);
    cells
        .iter()
        .map(|c| CellReport {
            v_f: c.v_f,
            v_o: c.v_o,
            score: c.plain.kpis.avg_score,
            score_switching: switching(c),
            best_in_row: row_best(cells, c.v_f, &plain) == Some(c.v_o),
            best_in_row_switching: row_best(cells, c.v_f, &switching) == Some(c.v_o),
            plain: c.plain,
            switching: c.switching,
            metrics: c.metrics,
        })
        .collect()
}

fn table(prep: &Prepared, cfg: &ExperimentConfig, stochastic: bool) -> Result<GridTable> {
    let grid = grid_config(cfg, prep.period, stochastic);
    let cells = run_cells(prep, &grid, &grid.cells(), cfg.workers)?;
    let kind = if stochastic { ForecastKind::Scenario } else { ForecastKind::Point };
    Ok(GridTable { forecast_kind: kind.name().into(), metric_names: metric_names(kind), cells: mark_rows(&cells) })
}

/// Runs the commitment grid(s).
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepResults> {
    let prep = prepare(cfg)?;
    let deterministic = table(&prep, cfg, false)?;
    let stochastic = if cfg.policy.stochastic { Some(table(&prep, cfg, true)?) } else { None };
    Ok(SweepResults {
        tool: "commitlab".into(),
        version: VERSION.into(),
        prng: PRNG_NAME.into(),
        config: cfg.clone(),
        period: prep.period,
        mean_load: prep.mean_load,
        sigma: prep.noise.sigma,
        deterministic,
        stochastic,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Table layout of a sweep: one line per `(algorithm, score, v_F)` with
/// columns `v_O = 1..=v_max`, empty above the diagonal, and the row-best
/// `v_O`.
pub fn grid_csv(results: &SweepResults) -> String {
    let v_max = results.config.policy.v_max;
    let mut out = String::from("algorithm,score,v_f");
    for o in 1..=v_max {
        out.push_str(&format!(",vo_{o}"));
    }
    out.push_str(",best_v_o\n");
    let tables = [("deterministic", Some(&results.deterministic)), ("stochastic", results.stochastic.as_ref())];
    for (name, t) in tables {
        let Some(t) = t else { continue };
        for (label, pick) in [
            ("avg_score", (|c: &CellReport| Some(c.score)) as fn(&CellReport) -> Option<f64>),
            ("avg_score_switching", |c: &CellReport| c.score_switching),
        ] {
            if t.cells.iter().all(|c| pick(c).is_none()) {
                continue;
            }
            for f in 1..=v_max {
                let row: Vec<&CellReport> = t.cells.iter().filter(|c| c.v_f == f).collect();
                out.push_str(&format!("{name},{label},{f}"));
                for o in 1..=v_max {
                    out.push(',');
                    if let Some(c) = row.iter().find(|c| c.v_o == o) {
                        out.push_str(&fmt_opt(pick(c)));
                    }
                }
                let best = row.iter().filter(|c| if label == "avg_score" { c.best_in_row } else { c.best_in_row_switching }).map(|c| c.v_o).next();
                out.push_str(&format!(",{}\n", best.map(|b| b.to_string()).unwrap_or_default()));
            }
        }
    }
    out
}

/// One row of `curves.csv` (`v = v_F = v_O`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    /// Commitment.
    pub v: usize,
    /// Full-window accuracy (MAE or energy score).
    pub accuracy: f64,
    /// Per-revision vertical stability.
    pub vertical: Option<f64>,
    /// Horizontal stability.
    pub horizontal: Option<f64>,
    /// Accuracy of the forecast in force.
    pub accuracy_in_force: f64,
    /// Hourly vertical change of the forecast in force.
    pub vertical_in_force: Option<f64>,
    /// Score without switching cost.
    pub score: f64,
    /// Score with switching cost.
    pub score_switching: Option<f64>,
}

/// Curves over `v = v_F = v_O` and their forecast kind.
pub fn curves(cfg: &ExperimentConfig) -> Result<(ForecastKind, Vec<CurveRow>)> {
    let prep = prepare(cfg)?;
    let stochastic = cfg.policy.stochastic;
    let grid = grid_config(cfg, prep.period, stochastic);
    let diag: Vec<(usize, usize)> = (1..=grid.v_max).map(|v| (v, v)).collect();
    let cells = run_cells(&prep, &grid, &diag, cfg.workers)?;
    let rows = cells
        .iter()
        .map(|c| CurveRow {
            v: c.v_f,
            accuracy: c.metrics.accuracy,
            vertical: c.metrics.vertical,
            horizontal: c.metrics.horizontal,
            accuracy_in_force: c.metrics.accuracy_in_force,
            vertical_in_force: c.metrics.vertical_in_force,
            score: c.plain.kpis.avg_score,
            score_switching: c.switching.as_ref().map(switching_score),
        })
        .collect();
    Ok((if stochastic { ForecastKind::Scenario } else { ForecastKind::Point }, rows))
}

/// Column names of `curves.csv` for a forecast kind.
pub fn curve_header(kind: ForecastKind) -> [String; 8] {
    let [a, v, h] = metric_names(kind);
    [
        "v".into(),
        a.clone(),
        v.clone(),
        h,
        format!("{a}_in_force"),
        format!("{v}_in_force"),
        "score".into(),
        "score_switching".into(),
    ]
}

/// Renders `curves.csv`.
pub fn curves_csv(kind: ForecastKind, rows: &[CurveRow]) -> String {
    let mut out = curve_header(kind).join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.v,
            r.accuracy,
            fmt_opt(r.vertical),
            fmt_opt(r.horizontal),
            r.accuracy_in_force,
            fmt_opt(r.vertical_in_force),
            r.score,
            fmt_opt(r.score_switching)
        ));
    }
    out
}

/// Contents of `corr.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlations {
    /// Number of curve rows used.
    pub rows: usize,
    /// Score columns.
    pub scores: Vec<String>,
    /// One entry per metric column.
    pub table: Vec<CorrelationRow>,
}

/// Correlations of one metric column with every score column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    /// Metric column.
    pub metric: String,
    /// Pearson coefficient per score column; `null` when undefined.
    pub pearson: Vec<Option<f64>>,
}

/// Pearson correlations between every metric column and every score
/// column of a curves CSV.
pub fn correlate(path: &Path) -> Result<Correlations> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    let mut cols: Vec<Vec<Option<f64>>> = vec![Vec::new(); header.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        for (j, field) in rec.iter().enumerate() {
            let v = if field.trim().is_empty() {
                None
            } else {
                Some(field.trim().parse::<f64>().map_err(|e| AppError::Data(format!("{}: row {}: {e}", path.display(), i + 1)))?)
            };
            cols[j].push(v);
        }
    }
    let n = cols.first().map_or(0, Vec::len);
    if n < 3 {
        return Err(AppError::Data(format!("{}: correlations need at least 3 rows, found {n}", path.display())));
    }
    let is_score = |h: &str| h.starts_with("score");
    let scores: Vec<usize> = (0..header.len()).filter(|&j| is_score(&header[j])).collect();
    let metrics: Vec<usize> = (0..header.len()).filter(|&j| header[j] != "v" && !is_score(&header[j])).collect();
    let full = |j: usize| cols[j].iter().copied().collect::<Option<Vec<f64>>>();
    let table = metrics
        .iter()
        .map(|&m| CorrelationRow {
            metric: header[m].clone(),
            pearson: scores
                .iter()
                .map(|&s| match (full(m), full(s)) {
                    (Some(x), Some(y)) => pearson(&x, &y).ok(),
                    _ => None,
                })
                .collect(),
        })
        .collect();
    Ok(Correlations { rows: n, scores: scores.iter().map(|&s| header[s].clone()).collect(), table })
}

/// Metadata written next to `tradeoff.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffMeta {
    /// Tool version.
    pub version: String,
    /// Parameters.
    pub params: BoundParams,
    /// Largest commitment.
    pub v_max: usize,
    /// Closed form used for the correlated-noise bound.
    pub expdecay_form: String,
    /// Caveat on interpretation.
    pub note: String,
    /// Minimiser of the independent-noise bound.
    pub argmin_iid: usize,
    /// Minimiser of the correlated-noise bound.
    pub argmin_expdecay: Option<usize>,
}

/// Trade-off curve and its metadata.
pub fn bounds(params: &BoundParams, v_max: usize) -> Result<(TradeoffCurve, TradeoffMeta)> {
    let curve = tradeoff_curve(params, v_max).map_err(|e| AppError::Config(e.to_string()))?;
    let meta = TradeoffMeta {
        version: VERSION.into(),
        params: *params,
        v_max,
        expdecay_form: EXPDECAY_FORM.into(),
        note: "analytic bounds of the abstract online problem; the simulator cost is a different functional, so comparisons are qualitative".into(),
        argmin_iid: curve.argmin_iid,
        argmin_expdecay: curve.argmin_expdecay,
    };
    Ok((curve, meta))
}

/// Renders `tradeoff.csv`.
pub fn tradeoff_csv(curve: &TradeoffCurve) -> String {
    let mut out = String::from("v,bound_iid,bound_expdecay,argmin_iid,argmin_expdecay\n");
    for r in &curve.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.v,
            r.bound_iid,
            fmt_opt(r.bound_expdecay),
            curve.argmin_iid,
            curve.argmin_expdecay.map(|v| v.to_string()).unwrap_or_default()
        ));
    }
    out
}

/// Result of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Tool version.
    pub version: String,
    /// Algorithm.
    pub algorithm: Algorithm,
    /// Forecast commitment.
    pub v_f: usize,
    /// Plan commitment.
    pub v_o: usize,
    /// Switching weight.
    pub beta: f64,
    /// Evaluation period.
    pub period: Period,
    /// Resolved forecast error scale (generated forecasts only).
    pub sigma: Option<f64>,
    /// KPI scores.
    pub kpis: KpiReport,
    /// Realized cost including switching.
    pub realized_cost: f64,
    /// Clipped actions.
    pub clips: usize,
    /// Realized cost of every AFHC instance.
    pub phase_costs: Vec<f64>,
}

/// Single policy run with its full trace.
pub fn simulate(cfg: &ExperimentConfig) -> Result<(SimulationReport, SimulationTrace)> {
    let prep = prepare(cfg)?;
    let p = &cfg.policy;
    let policy = PolicyConfig {
        algorithm: p.algorithm,
        beta: p.beta,
        w_co2: p.w_co2,
        tol: p.tol,
        stochastic: p.stochastic,
        ..PolicyConfig::fhc(p.v_f, p.v_o, p.horizon, prep.period)
    };
    let (archives, sigma) = match cfg.forecast.source {
        ForecastSource::Noise => {
            let grid = grid_config(cfg, prep.period, p.stochastic);
            (grid_archives(&prep.truths, &prep.noise, &grid, p.v_f)?, Some(prep.noise.sigma))
        }
        ForecastSource::Archive => {
            if cfg.forecast.archives.len() != prep.env.n_buildings() {
                return Err(AppError::Config(format!(
                    "{} archives given for {} buildings",
                    cfg.forecast.archives.len(),
                    prep.env.n_buildings()
                )));
            }
            let kind = if p.stochastic { ForecastKind::Scenario } else { ForecastKind::Point };
            let a = cfg.forecast.archives.iter().map(|f| data::import_archive(f, kind)).collect::<Result<Vec<_>>>()?;
            (a, None)
        }
    };
    let (trace, phase_costs) = match p.algorithm {
        Algorithm::Fhc => (run_fhc(&prep.env, &archives, &policy)?.trace, Vec::new()),
        Algorithm::Afhc => {
            let run = run_afhc(&prep.env, &archives, &policy)?;
            let costs = run.phases.iter().map(|r| r.trace.realized_cost(p.beta, p.w_co2)).collect();
            (run.trace, costs)
        }
    };
    let report = SimulationReport {
        version: VERSION.into(),
        algorithm: p.algorithm,
        v_f: p.v_f,
        v_o: p.v_o,
        beta: p.beta,
        period: prep.period,
        sigma,
        kpis: score(&trace, &prep.env, cfg.scoring.include_grid)?,
        realized_cost: trace.realized_cost(p.beta, p.w_co2),
        clips: trace.clips,
        phase_costs,
    };
    Ok((report, trace))
}

/// Renders a trace: district columns then SOC and actions per building.
pub fn trace_csv(trace: &SimulationTrace) -> String {
    let nb = trace.soc.len();
    let mut out = String::from("hour,net_load,price_cost,carbon_cost");
    for b in 0..nb {
        out.push_str(&format!(",soc_{b},charge_{b},discharge_{b}"));
    }
    out.push('\n');
    for k in 0..trace.len() {
        out.push_str(&format!("{},{},{},{}", trace.start + k as i64, trace.net_load[k], trace.price_cost[k], trace.carbon_cost[k]));
        for b in 0..nb {
            let a = trace.actions[b][k];
            out.push_str(&format!(",{},{},{}", trace.soc[b][k + 1], a.charge, a.discharge));
        }
        out.push('\n');
    }
    out
}
