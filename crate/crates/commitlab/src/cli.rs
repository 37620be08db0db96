//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use commitlab_core::policy::Algorithm;

use crate::config::ExperimentConfig;
use crate::error::{AppError, Result};
use crate::{data, experiment};

/// Commitment experiments for forecast-driven battery control.
#[derive(Debug, Parser)]
#[command(name = "commitlab", version)]
pub struct Cli {
    /// Experiment configuration (TOML); defaults apply without it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (0 uses all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Shared overrides.
    #[command(flatten)]
    pub overrides: Overrides,
    /// Verb.
    #[command(subcommand)]
    pub command: Command,
}

/// Configuration overrides shared by the experiment verbs.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Forecast horizon.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Largest commitment.
    #[arg(long, global = true)]
    pub v_max: Option<usize>,
    /// Switching-cost weight.
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    /// Forecast error scale.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Evaluated hours.
    #[arg(long, global = true)]
    pub hours: Option<usize>,
    /// Synthetic days.
    #[arg(long, global = true)]
    pub n_days: Option<usize>,
    /// Synthetic buildings.
    #[arg(long, global = true)]
    pub n_buildings: Option<usize>,
    /// Scenario-based control.
    #[arg(long, global = true)]
    pub stochastic: bool,
    /// Scenarios per window.
    #[arg(long, global = true)]
    pub n_scenarios: Option<usize>,
    /// Score without grid KPIs.
    #[arg(long, global = true)]
    pub no_grid: bool,
}

/// Verbs.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the environment as `env.csv` and `district.csv`.
    GenData,
    /// Run the commitment grid: `results.json` and `grid.csv`.
    Sweep,
    /// Metrics and scores along `v_F = v_O`: `curves.csv`.
    Curves,
    /// Pearson correlations of a curves file: `corr.json`.
    Correlate {
        /// Curves CSV (default: `<out>/curves.csv`).
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Analytic trade-off curve: `tradeoff.csv` and `tradeoff.json`.
    Bounds(BoundsArgs),
    /// One policy run: `trace.csv` and `simulate.json`.
    Simulate(SimulateArgs),
}

/// Overrides of `[bounds]`.
#[derive(Debug, Default, Args)]
pub struct BoundsArgs {
    /// Horizon `T`.
    #[arg(long = "t")]
    pub t: Option<f64>,
    /// Switching weight.
    #[arg(long = "bound-beta")]
    pub beta: Option<f64>,
    /// Action-set diameter.
    #[arg(long)]
    pub diam: Option<f64>,
    /// Hölder constant.
    #[arg(long)]
    pub g_lip: Option<f64>,
    /// Hölder exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Noise scale.
    #[arg(long = "bound-sigma")]
    pub sigma: Option<f64>,
    /// Correlation decay.
    #[arg(long)]
    pub a: Option<f64>,
    /// Correlation magnitude.
    #[arg(long)]
    pub c: Option<f64>,
    /// Largest commitment.
    #[arg(long = "bound-v-max")]
    pub v_max: Option<usize>,
}

/// Algorithm names on the command line.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgorithmArg {
    /// Fixed horizon control.
    Fhc,
    /// Averaging fixed horizon control.
    Afhc,
}

/// Overrides of the single-run settings.
#[derive(Debug, Default, Args)]
pub struct SimulateArgs {
    /// Algorithm.
    #[arg(long, value_enum)]
    pub algorithm: Option<AlgorithmArg>,
    /// Forecast commitment.
    #[arg(long)]
    pub v_f: Option<usize>,
    /// Plan commitment.
    #[arg(long)]
    pub v_o: Option<usize>,
    /// Archive CSV per building.
    #[arg(long = "archive")]
    pub archives: Vec<PathBuf>,
}

impl Cli {
    /// Configuration file plus command-line overrides.
    pub fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        let o = &self.overrides;
        let p = &mut cfg.policy;
        set(&mut p.horizon, o.horizon);
        set(&mut p.v_max, o.v_max);
        set(&mut p.beta, o.beta);
        set(&mut p.n_scenarios, o.n_scenarios);
        p.stochastic |= o.stochastic;
        if o.sigma.is_some() {
            cfg.forecast.sigma = o.sigma;
        }
        set(&mut cfg.scoring.hours, o.hours);
        cfg.scoring.include_grid &= !o.no_grid;
        set(&mut cfg.env.synthetic.n_days, o.n_days);
        set(&mut cfg.env.synthetic.n_buildings, o.n_buildings);
        match &self.command {
            Command::Bounds(b) => {
                let q = &mut cfg.bounds.params;
                set(&mut q.t, b.t);
                set(&mut q.beta, b.beta);
                set(&mut q.diam, b.diam);
                set(&mut q.g_lip, b.g_lip);
                set(&mut q.alpha, b.alpha);
                set(&mut q.sigma, b.sigma);
                set(&mut q.a, b.a);
                set(&mut q.c, b.c);
                set(&mut cfg.bounds.v_max, b.v_max);
            }
            Command::Simulate(s) => {
                if let Some(a) = s.algorithm {
                    cfg.policy.algorithm = match a {
                        AlgorithmArg::Fhc => Algorithm::Fhc,
                        AlgorithmArg::Afhc => Algorithm::Afhc,
                    };
                }
                set(&mut cfg.policy.v_f, s.v_f);
                set(&mut cfg.policy.v_o, s.v_o);
                if cfg.policy.algorithm == Algorithm::Afhc {
                    cfg.policy.v_o = cfg.policy.v_f;
                }
                if !s.archives.is_empty() {
                    cfg.forecast.archives = s.archives.clone();
                    cfg.forecast.source = crate::config::ForecastSource::Archive;
                }
            }
            _ => {}
        }
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(AppError::io(&path))?;
    eprintln!("wrote {}", path.display());
    Ok(path)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("outputs are serialisable");
    s.push('\n');
    s
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.config()?;
    let out = cfg.output_dir.clone();
    std::fs::create_dir_all(&out).map_err(AppError::io(&out))?;
    match &cli.command {
        Command::GenData => {
            cfg.validate()?;
            let env = experiment::load_env(&cfg)?;
            let (e, d) = (out.join("env.csv"), out.join("district.csv"));
            data::write_env_csv(&e, &env)?;
            data::write_district_csv(&d, &env)?;
            eprintln!("wrote {} and {}", e.display(), d.display());
        }
        Command::Sweep => {
            let results = experiment::sweep(&cfg)?;
            write(&out, "results.json", &json(&results))?;
            write(&out, "grid.csv", &experiment::grid_csv(&results))?;
        }
        Command::Curves => {
            let (kind, rows) = experiment::curves(&cfg)?;
            write(&out, "curves.csv", &experiment::curves_csv(kind, &rows))?;
        }
        Command::Correlate { curves } => {
            let path = curves.clone().unwrap_or_else(|| out.join("curves.csv"));
            let corr = experiment::correlate(&path)?;
            write(&out, "corr.json", &json(&corr))?;
        }
        Command::Bounds(_) => {
            let (curve, meta) = experiment::bounds(&cfg.bounds.params, cfg.bounds.v_max)?;
            write(&out, "tradeoff.csv", &experiment::tradeoff_csv(&curve))?;
            write(&out, "tradeoff.json", &json(&meta))?;
        }
        Command::Simulate(_) => {
            let (report, trace) = experiment::simulate(&cfg)?;
            write(&out, "trace.csv", &experiment::trace_csv(&trace))?;
            write(&out, "simulate.json", &json(&report))?;
        }
    }
    Ok(())
}
