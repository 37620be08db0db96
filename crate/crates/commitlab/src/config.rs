//! Experiment configuration file (TOML).
//!
//! Every section and key is optional; missing values take the desk-scale
//! defaults (one building, eight 730-hour months, `H = 24`, commitments
//! 1..=12, exponentially decaying forecast errors scaled to a mean absolute
//! error of 10% of the mean load).

use std::path::{Path, PathBuf};

use commitlab_core::battery::{BatterySpec, SyntheticEnvConfig};
use commitlab_core::bounds::BoundParams;
use commitlab_core::forecast::NoiseKind;
use commitlab_core::policy::Algorithm;
use commitlab_core::rng::Stream;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Salts deriving the named sub-seeds from the master seed.
pub mod salt {
    /// Synthetic environment.
    pub const ENV: u64 = 1;
    /// Forecast errors.
    pub const FORECAST: u64 = 2;
    /// Scenario generation.
    pub const SCENARIOS: u64 = 3;
}

/// Complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Master seed; every random stream derives from it.
    pub seed: u64,
    /// Directory receiving all outputs.
    pub output_dir: PathBuf,
    /// Worker threads for sweeps (0 uses all cores).
    pub workers: usize,
    /// Environment source.
    pub env: EnvConfig,
    /// Battery installed in every building.
    pub battery: BatterySpec,
    /// Forecast source.
    pub forecast: ForecastConfig,
    /// Policy grid.
    pub policy: PolicyGridConfig,
    /// Scoring.
    pub scoring: ScoringConfig,
    /// Analytic bound parameters.
    pub bounds: BoundsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output_dir: PathBuf::from("out"),
            workers: 0,
            env: EnvConfig::default(),
            battery: BatterySpec::default(),
            forecast: ForecastConfig::default(),
            policy: PolicyGridConfig::default(),
            scoring: ScoringConfig::default(),
            bounds: BoundsConfig::default(),
        }
    }
}

/// Where the environment comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvSource {
    /// Generated from `[env.synthetic]`.
    Synthetic,
    /// Read from `env_csv` and `district_csv`.
    Csv,
}

/// `[env]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    /// Source selector.
    pub source: EnvSource,
    /// Building CSV (`hour,building,load_kwh,pv_kwh`).
    pub env_csv: Option<PathBuf>,
    /// District CSV (`hour,price,carbon`).
    pub district_csv: Option<PathBuf>,
    /// Synthetic profile.
    pub synthetic: SyntheticProfile,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { source: EnvSource::Synthetic, env_csv: None, district_csv: None, synthetic: SyntheticProfile::default() }
    }
}

/// `[env.synthetic]` section: shape of the generated district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticProfile {
    /// Number of buildings.
    pub n_buildings: usize,
    /// Days, rounded up to whole 730-hour months.
    pub n_days: usize,
    /// Mean hourly load, kWh.
    pub load_mean: f64,
    /// Relative daily load swing.
    pub load_amplitude: f64,
    /// Relative load noise.
    pub load_noise: f64,
    /// Clear-sky PV peak, kWh.
    pub pv_peak: f64,
    /// Relative PV noise.
    pub pv_noise: f64,
    /// Off-peak price.
    pub price_offpeak: f64,
    /// Peak price.
    pub price_peak: f64,
    /// First peak hour of day.
    pub peak_start: u32,
    /// Hour after the last peak hour.
    pub peak_end: u32,
    /// Mean carbon intensity.
    pub carbon_mean: f64,
    /// Relative carbon swing.
    pub carbon_amplitude: f64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        let d = SyntheticEnvConfig::default();
        SyntheticProfile {
            n_buildings: d.n_buildings,
            n_days: d.n_days,
            load_mean: d.load_mean,
            load_amplitude: d.load_amplitude,
            load_noise: d.load_noise,
            pv_peak: d.pv_peak,
            pv_noise: d.pv_noise,
            price_offpeak: d.price_offpeak,
            price_peak: d.price_peak,
            peak_start: d.peak_start,
            peak_end: d.peak_end,
            carbon_mean: d.carbon_mean,
            carbon_amplitude: d.carbon_amplitude,
        }
    }
}

/// Where forecasts come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastSource {
    /// Truth plus generated noise.
    Noise,
    /// Imported archive CSVs, one per building (`simulate` only).
    Archive,
}

/// Noise model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseName {
    /// Independent errors.
    Iid,
    /// Exponentially decaying correlated errors.
    ExpDecay,
}

/// `[forecast]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForecastConfig {
    /// Source selector.
    pub source: ForecastSource,
    /// Noise model.
    pub noise: NoiseName,
    /// Explicit error scale; when absent it is derived from
    /// `target_mae_fraction`.
    pub sigma: Option<f64>,
    /// Target full-window MAE as a fraction of the mean building load.
    pub target_mae_fraction: f64,
    /// Decay rate of correlated errors.
    pub a: f64,
    /// Correlation magnitude.
    pub c: f64,
    /// Archive CSVs (`origin,target,scenario,value`) per building.
    pub archives: Vec<PathBuf>,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        ForecastConfig {
            source: ForecastSource::Noise,
            noise: NoiseName::ExpDecay,
            sigma: None,
            target_mae_fraction: 0.1,
            a: 0.8,
            c: 1.0,
            archives: Vec::new(),
        }
    }
}

impl ForecastConfig {
    /// Core noise kind.
    pub fn kind(&self) -> NoiseKind {
        match self.noise {
            NoiseName::Iid => NoiseKind::Iid,
            NoiseName::ExpDecay => NoiseKind::ExpDecay { a: self.a, c: self.c },
        }
    }
}

/// `[policy]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyGridConfig {
    /// Algorithm of `simulate`.
    pub algorithm: Algorithm,
    /// Forecast horizon `H`.
    pub horizon: usize,
    /// Largest commitment of `sweep` and `curves`.
    pub v_max: usize,
    /// Forecast commitment of `simulate`.
    pub v_f: usize,
    /// Plan commitment of `simulate`.
    pub v_o: usize,
    /// Switching-cost weight of the runs scored with grid KPIs.
    pub beta: f64,
    /// Carbon weight inside the lookahead objective.
    pub w_co2: f64,
    /// Also run scenario-based (stochastic) FHC.
    pub stochastic: bool,
    /// Scenarios per window.
    pub n_scenarios: usize,
    /// Relative scenario noise.
    pub noise_scale: f64,
    /// LP tolerance.
    pub tol: f64,
}

impl Default for PolicyGridConfig {
    fn default() -> Self {
        PolicyGridConfig {
            algorithm: Algorithm::Fhc,
            horizon: 24,
            v_max: 12,
            v_f: 1,
            v_o: 1,
            beta: 0.5,
            w_co2: 1.0,
            stochastic: false,
            n_scenarios: 20,
            noise_scale: 0.1,
            tol: 1e-9,
        }
    }
}

/// `[scoring]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringConfig {
    /// Score the switching-cost runs with grid KPIs.
    pub include_grid: bool,
    /// Energy-score exponent.
    pub es_p: f64,
    /// First evaluated hour.
    pub start: i64,
    /// Evaluated hours (0: every whole month the data allows).
    pub hours: usize,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig { include_grid: true, es_p: 1.0, start: 0, hours: 0 }
    }
}

/// `[bounds]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundsConfig {
    /// Bound parameters.
    #[serde(flatten)]
    pub params: BoundParams,
    /// Largest tabulated commitment.
    pub v_max: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig { params: BoundParams::default(), v_max: 24 }
    }
}

impl ExperimentConfig {
    /// Reads and validates a TOML file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    /// TOML rendering.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is always serialisable")
    }

    /// Checks ranges and referenced files.
    pub fn validate(&self) -> Result<()> {
        let p = &self.policy;
        let bad = |m: String| Err(AppError::Config(m));
        if p.horizon == 0 {
            return bad("policy.horizon must be >= 1".into());
        }
        if p.v_max == 0 || p.v_max > p.horizon {
            return bad(format!("policy.v_max must lie in 1..={} (the horizon), got {}", p.horizon, p.v_max));
        }
        if p.v_o == 0 || p.v_o > p.v_f || p.v_f > p.horizon {
            return bad(format!("need 1 <= policy.v_o <= policy.v_f <= horizon, got v_o={} v_f={}", p.v_o, p.v_f));
        }
        if !(p.beta >= 0.0) || !(p.w_co2 >= 0.0) || !(p.tol > 0.0) {
            return bad("policy.beta and policy.w_co2 must be >= 0 and policy.tol > 0".into());
        }
        if p.stochastic && (p.n_scenarios == 0 || !(p.noise_scale >= 0.0)) {
            return bad("stochastic runs need n_scenarios >= 1 and noise_scale >= 0".into());
        }
        let f = &self.forecast;
        if let Some(s) = f.sigma {
            if !(s >= 0.0) {
                return bad("forecast.sigma must be >= 0".into());
            }
        }
        if !(f.target_mae_fraction >= 0.0) {
            return bad("forecast.target_mae_fraction must be >= 0".into());
        }
        if !(0.0..1.0).contains(&f.a) || !(f.c > 0.0) {
            return bad("forecast.a must lie in [0, 1) and forecast.c must be > 0".into());
        }
        if f.source == ForecastSource::Archive && f.archives.is_empty() {
            return bad("forecast.source = \"archive\" needs forecast.archives".into());
        }
        if !(self.scoring.es_p >= 1.0) {
            return bad("scoring.es_p must be >= 1".into());
        }
        if self.env.source == EnvSource::Csv {
            for (key, path) in [("env.env_csv", &self.env.env_csv), ("env.district_csv", &self.env.district_csv)] {
                match path {
                    None => return bad(format!("env.source = \"csv\" needs {key}")),
                    Some(p) if !p.is_file() => return bad(format!("{key}: {} does not exist", p.display())),
                    _ => {}
                }
            }
        }
        for path in &f.archives {
            if f.source == ForecastSource::Archive && !path.is_file() {
                return bad(format!("forecast archive {} does not exist", path.display()));
            }
        }
        self.battery.validate().map_err(|e| AppError::Config(format!("battery: {e}")))?;
        Ok(())
    }

    /// Named sub-seed.
    pub fn sub_seed(&self, salt: u64) -> u64 {
        Stream::derive_seed(self.seed, salt)
    }

    /// Core generator settings with a forecast tail of `horizon` hours.
    pub fn synthetic(&self) -> SyntheticEnvConfig {
        let s = &self.env.synthetic;
        SyntheticEnvConfig {
            n_buildings: s.n_buildings,
            n_days: s.n_days,
            tail_hours: self.policy.horizon,
            seed: self.sub_seed(salt::ENV),
            load_mean: s.load_mean,
            load_amplitude: s.load_amplitude,
            load_noise: s.load_noise,
            pv_peak: s.pv_peak,
            pv_noise: s.pv_noise,
            price_offpeak: s.price_offpeak,
            price_peak: s.price_peak,
            peak_start: s.peak_start,
            peak_end: s.peak_end,
            carbon_mean: s.carbon_mean,
            carbon_amplitude: s.carbon_amplitude,
            battery: self.battery,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = ExperimentConfig::default();
        let back: ExperimentConfig = toml::from_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg: ExperimentConfig = toml::from_str("seed = 4\n[policy]\nv_max = 3\n").unwrap();
        assert_eq!(cfg.seed, 4);
        assert_eq!(cfg.policy.v_max, 3);
        assert_eq!(cfg.policy.horizon, 24);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<ExperimentConfig>("[policy]\nvmax = 3\n").is_err());
    }

    #[test]
    fn invalid_ranges_are_config_errors() {
        let mut cfg = ExperimentConfig::default();
        cfg.policy.v_max = 30;
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
        let mut cfg = ExperimentConfig::default();
        cfg.env.source = EnvSource::Csv;
        assert!(cfg.validate().is_err());
    }
}
