//! Rolling-origin forecast generation with controlled error structure.
//!
//! Forecasts are the truth plus noise so that accuracy and stability become
//! experimental variables. Two error models are provided:
//!
//! * `Iid`: every (origin, lead) error is a fresh `N(0, sigma^2)` draw.
//! * `ExpDecay`: a single per-hour innovation stream `e(h) ~ N(0, sigma^2)` is
//!   shared by all origins and filtered as
//!   `err(t, i) = sum_{s=0}^{i-1} c * a^s * e(t + i - s)`,
//!   so revisions of one target hour are correlated and the error shrinks as
//!   the origin approaches the target.
//!
//! Both models index their random draws by absolute hour, so archives with
//! different revision intervals generated from the same seed share errors.

use alloc::format;
use alloc::vec::Vec;

use crate::rng::{stream, Stream};
use crate::series::{ForecastArchive, ForecastKind, ForecastWindow, TimeSeries};
use crate::{Error, Result};

/// Error structure of generated point forecasts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum NoiseKind {
    /// Independent errors per (origin, lead).
    Iid,
    /// Exponentially decaying correlation through a shared innovation stream.
    ExpDecay {
        /// Decay rate in `[0, 1)`.
        a: f64,
        /// Correlation magnitude, `> 0`.
        c: f64,
    },
}

/// Forecast error model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    /// Structure of the error.
    pub kind: NoiseKind,
    /// Per-step error scale.
    pub sigma: f64,
    /// Seed of the error streams.
    pub seed: u64,
}

impl NoiseModel {
    /// I.i.d. Gaussian errors.
    pub fn iid(sigma: f64, seed: u64) -> Self {
        NoiseModel { kind: NoiseKind::Iid, sigma, seed }
    }

    /// Exponentially decaying correlated errors.
    pub fn exp_decay(sigma: f64, a: f64, c: f64, seed: u64) -> Self {
        NoiseModel { kind: NoiseKind::ExpDecay { a, c }, sigma, seed }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if let NoiseKind::ExpDecay { a, c } = self.kind {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::Config(format!("decay a must lie in [0, 1), got {a}")));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::Config(format!("correlation magnitude c must be > 0, got {c}")));
            }
        }
        Ok(())
    }

    /// Standard deviation of the lead-`i` error implied by the model.
    pub fn lead_std(&self, lead: usize) -> f64 {
        match self.kind {
            NoiseKind::Iid => self.sigma,
            NoiseKind::ExpDecay { a, c } => {
                let var: f64 = (0..lead).map(|s| libm::pow(a, 2.0 * s as f64)).sum();
                c * self.sigma * libm::sqrt(var)
            }
        }
    }
}

/// Scale `sigma` so that the expected full-window MAE of `model` equals
/// `target_mae` for horizon `horizon`. Uses `E|N(0, s^2)| = s * sqrt(2 / pi)`.
pub fn sigma_for_mae(model: NoiseKind, horizon: usize, target_mae: f64) -> f64 {
    let unit = NoiseModel { kind: model, sigma: 1.0, seed: 0 };
    let mean_std: f64 = (1..=horizon).map(|i| unit.lead_std(i)).sum::<f64>() / horizon as f64;
    target_mae / (mean_std * libm::sqrt(2.0 / core::f64::consts::PI))
}

/// Point archive over every origin whose window fits inside `truth`.
pub fn generate_point_archive(
    truth: &TimeSeries,
    horizon: usize,
    revision_interval: usize,
    model: &NoiseModel,
) -> Result<ForecastArchive> {
    let last = truth.end() - 1 - horizon as i64;
    if last < truth.start() {
        return Err(Error::Coverage { from: truth.start() + 1, to: truth.start() + 1 + horizon as i64 });
    }
    let count = ((last - truth.start()) / revision_interval.max(1) as i64 + 1) as usize;
    generate_point_archive_from(truth, horizon, revision_interval, truth.start(), count, model)
}

/// Point archive with `count` origins starting at `first_origin`.
pub fn generate_point_archive_from(
    truth: &TimeSeries,
    horizon: usize,
    revision_interval: usize,
    first_origin: i64,
    count: usize,
    model: &NoiseModel,
) -> Result<ForecastArchive> {
    model.validate()?;
    if horizon == 0 || revision_interval == 0 || count == 0 {
        return Err(Error::Config("horizon, revision interval and origin count must be >= 1".into()));
    }
    let last_origin = first_origin + ((count - 1) * revision_interval) as i64;
    truth.require(first_origin + 1, last_origin + 1 + horizon as i64)?;

    let innovations = match model.kind {
        NoiseKind::ExpDecay { .. } => {
            let mut s = Stream::new(model.seed, stream::INNOVATION);
            truth.values().iter().map(|_| model.sigma * s.normal()).collect::<Vec<_>>()
        }
        NoiseKind::Iid => Vec::new(),
    };

    let mut windows = Vec::with_capacity(count);
    for k in 0..count {
        let origin = first_origin + (k * revision_interval) as i64;
        let actual = truth.slice(origin + 1, horizon)?;
        let values = match model.kind {
            NoiseKind::Iid => {
                let mut s = Stream::new(model.seed, stream::IID | origin_index(truth, origin));
                actual.iter().map(|y| y + model.sigma * s.normal()).collect()
            }
            NoiseKind::ExpDecay { a, c } => {
                let base = (origin + 1 - truth.start()) as usize;
                let mut err = 0.0;
                actual
                    .iter()
                    .enumerate()
                    .map(|(i, y)| {
                        err = c * innovations[base + i] + a * err;
                        y + err
                    })
                    .collect()
            }
        };
        windows.push(ForecastWindow::point(origin, values)?);
    }
    ForecastArchive::new(revision_interval, windows)
}

fn origin_index(truth: &TimeSeries, origin: i64) -> u64 {
    ((origin - truth.start()) as u64) & 0xFFFF_FFFF
}

/// Scenario generation around a point forecast.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScenarioGenConfig {
    /// Number of scenarios `N`.
    pub n_scenarios: usize,
    /// Relative noise: scenario = point * (1 + noise_scale * z).
    pub noise_scale: f64,
    /// Seed of the scenario stream.
    pub seed: u64,
}

/// Expands a point archive into `N` scenarios per window with Gaussian noise
/// proportional to the point value. Values are not truncated at zero.
pub fn generate_scenario_archive(point: &ForecastArchive, cfg: &ScenarioGenConfig) -> Result<ForecastArchive> {
    if point.kind() != ForecastKind::Point {
        return Err(Error::WrongKind { expected: "point" });
    }
    if cfg.n_scenarios == 0 {
        return Err(Error::Config("n_scenarios must be >= 1".into()));
    }
    if !(cfg.noise_scale >= 0.0 && cfg.noise_scale.is_finite()) {
        return Err(Error::Config(format!("noise_scale must be >= 0, got {}", cfg.noise_scale)));
    }
    let n = cfg.n_scenarios;
    let windows = point
        .windows()
        .iter()
        .map(|w| {
            let mut s = Stream::new(cfg.seed, stream::SCENARIO | ((w.origin() as u64) & 0xFFFF_FFFF));
            let values = w.point_values().expect("point archive");
            let mut data = Vec::with_capacity(values.len() * n);
            for &v in values {
                for _ in 0..n {
                    data.push(v * (1.0 + cfg.noise_scale * s.normal()));
                }
            }
            ForecastWindow::scenarios_target_major(w.origin(), n, data)
        })
        .collect::<Result<Vec<_>>>()?;
    ForecastArchive::new(point.revision_interval(), windows)
}

/// One `origin,target,scenario,value` record of the archive file format.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArchiveRecord {
    /// Issue hour.
    pub origin: i64,
    /// Target hour.
    pub target: i64,
    /// Scenario index (0 for point forecasts).
    pub scenario: usize,
    /// Predicted value.
    pub value: f64,
}

/// Format violation found while assembling an archive from records.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordError {
    /// 1-based data row (header excluded).
    pub row: usize,
    /// Description.
    pub message: alloc::string::String,
}

impl core::fmt::Display for RecordError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "row {}: {}", self.row, self.message)
    }
}

/// Assembles and validates an archive from records sorted by
/// `(origin, scenario, target)`.
pub fn archive_from_records(records: &[ArchiveRecord], kind: ForecastKind) -> core::result::Result<ForecastArchive, RecordError> {
    let err = |row: usize, message: alloc::string::String| RecordError { row, message };
    if records.is_empty() {
        return Err(err(0, "archive file has no data rows".into()));
    }
    let mut windows = Vec::new();
    let mut horizon = None;
    let mut n_scen = None;
    let mut interval = None;
    let mut i = 0;
    while i < records.len() {
        let origin = records[i].origin;
        let start = i;
        while i < records.len() && records[i].origin == origin {
            i += 1;
        }
        let group = &records[start..i];
        // rows: scenario-major, each scenario a contiguous run of targets
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (k, r) in group.iter().enumerate() {
            let row_no = start + k + 1;
            if !r.value.is_finite() {
                return Err(err(row_no, format!("non-finite value {}", r.value)));
            }
            if kind == ForecastKind::Point && r.scenario != 0 {
                return Err(err(row_no, format!("point archives use scenario 0 only, found {}", r.scenario)));
            }
            if r.scenario == rows.len() {
                rows.push(Vec::new());
            } else if r.scenario + 1 != rows.len() {
                return Err(err(row_no, format!("scenario {} out of order", r.scenario)));
            }
            let row = rows.last_mut().expect("pushed");
            let expected = origin + 1 + row.len() as i64;
            if r.target != expected {
                return Err(err(row_no, format!("target {} where {expected} expected", r.target)));
            }
            row.push(r.value);
        }
        let last_row = start + group.len();
        let h = rows[0].len();
        if let Some(j) = rows.iter().position(|r| r.len() != h) {
            return Err(err(last_row, format!("ragged window at origin {origin}: scenario {j} has {} targets, expected {h}", rows[j].len())));
        }
        if *horizon.get_or_insert(h) != h {
            return Err(err(last_row, format!("window at origin {origin} has horizon {h}, expected {}", horizon.unwrap())));
        }
        if *n_scen.get_or_insert(rows.len()) != rows.len() {
            return Err(err(last_row, format!("window at origin {origin} has {} scenarios, expected {}", rows.len(), n_scen.unwrap())));
        }
        if let Some(prev) = windows.last().map(|w: &ForecastWindow| w.origin()) {
            let step = origin - prev;
            if step <= 0 || *interval.get_or_insert(step) != step {
                return Err(err(start + 1, format!("origin spacing {step} differs from {}", interval.unwrap_or(step))));
            }
        }
        let w = match kind {
            ForecastKind::Point => ForecastWindow::point(origin, rows.pop().expect("one row")),
            ForecastKind::Scenario => ForecastWindow::scenarios(origin, &rows),
        }
        .map_err(|e| err(start + 1, format!("{e}")))?;
        windows.push(w);
    }
    ForecastArchive::new(interval.unwrap_or(1) as usize, windows).map_err(|e| err(records.len(), format!("{e}")))
}

/// Flattens an archive into records sorted by `(origin, scenario, target)`.
pub fn archive_records(archive: &ForecastArchive) -> Vec<ArchiveRecord> {
    let mut out = Vec::with_capacity(archive.windows().len() * archive.horizon() * archive.n_scenarios());
    for w in archive.windows() {
        for j in 0..w.n_scenarios() {
            for (i, target) in w.targets().enumerate() {
                out.push(ArchiveRecord { origin: w.origin(), target, scenario: j, value: w.lead(i + 1)[j] });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn truth(n: usize) -> TimeSeries {
        TimeSeries::new(0, (0..n).map(|h| 5.0 + libm::sin(h as f64 * 0.3)).collect()).unwrap()
    }

    #[test]
    fn zero_sigma_is_perfect_for_both_models() {
        let y = truth(60);
        for model in [NoiseModel::iid(0.0, 3), NoiseModel::exp_decay(0.0, 0.8, 1.0, 3)] {
            let a = generate_point_archive(&y, 6, 2, &model).unwrap();
            for w in a.windows() {
                assert_eq!(w.point_values().unwrap(), y.slice(w.origin() + 1, 6).unwrap());
            }
        }
    }

    #[test]
    fn archive_origins_fit_truth() {
        let y = truth(30);
        let a = generate_point_archive(&y, 6, 4, &NoiseModel::iid(1.0, 1)).unwrap();
        assert_eq!(a.first_origin(), 0);
        assert_eq!(a.last_origin(), 20);
        assert!(a.last_origin() + 6 < y.end());
        assert!(matches!(
            generate_point_archive_from(&y, 6, 4, 0, 7, &NoiseModel::iid(1.0, 1)),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn same_seed_same_archive() {
        let y = truth(80);
        for model in [NoiseModel::iid(1.0, 9), NoiseModel::exp_decay(1.0, 0.7, 1.0, 9)] {
            let a = generate_point_archive(&y, 8, 3, &model).unwrap();
            let b = generate_point_archive(&y, 8, 3, &model).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn errors_shared_across_revision_intervals() {
        let y = truth(80);
        for model in [NoiseModel::iid(1.0, 4), NoiseModel::exp_decay(1.0, 0.7, 1.0, 4)] {
            let a1 = generate_point_archive(&y, 8, 1, &model).unwrap();
            let a4 = generate_point_archive(&y, 8, 4, &model).unwrap();
            for w in a4.windows() {
                assert_eq!(a1.latest_at(w.origin()).unwrap(), w);
            }
        }
    }

    #[test]
    fn exp_decay_matches_filtered_innovations() {
        // direct double sum against the recurrence used by the generator
        let y = TimeSeries::new(0, vec![0.0; 40]).unwrap();
        let (a, c) = (0.6, 1.3);
        let model = NoiseModel::exp_decay(1.0, a, c, 11);
        let arch = generate_point_archive(&y, 5, 1, &model).unwrap();
        let mut s = Stream::new(11, stream::INNOVATION);
        let e: Vec<f64> = (0..40).map(|_| s.normal()).collect();
        for w in arch.windows() {
            let t = w.origin() as usize;
            for i in 1..=5 {
                let direct: f64 = (0..i).map(|s| c * libm::pow(a, s as f64) * e[t + i - s]).sum();
                assert!((w.lead(i)[0] - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scenario_examples() {
        let point = ForecastArchive::new(1, vec![ForecastWindow::point(0, vec![2.0, 0.0, 10.0]).unwrap()]).unwrap();
        let flat = generate_scenario_archive(&point, &ScenarioGenConfig { n_scenarios: 3, noise_scale: 0.0, seed: 1 }).unwrap();
        for j in 0..3 {
            assert_eq!(flat.windows()[0].scenario_row(j), vec![2.0, 0.0, 10.0]);
        }
        let noisy = generate_scenario_archive(&point, &ScenarioGenConfig { n_scenarios: 200, noise_scale: 0.1, seed: 1 }).unwrap();
        assert!(noisy.windows()[0].marginal(2).unwrap().iter().all(|v| *v == 0.0));
        let at10 = noisy.windows()[0].marginal(3).unwrap();
        let mean = at10.iter().sum::<f64>() / 200.0;
        let sd = libm::sqrt(at10.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 199.0);
        assert!((sd - 1.0).abs() < 0.1, "sample std {sd}");
        assert_eq!(
            generate_scenario_archive(&noisy, &ScenarioGenConfig { n_scenarios: 2, noise_scale: 0.1, seed: 1 }),
            Err(Error::WrongKind { expected: "point" })
        );
    }

    #[test]
    fn invalid_models_rejected() {
        let y = truth(30);
        assert!(generate_point_archive(&y, 4, 1, &NoiseModel::exp_decay(1.0, 1.0, 1.0, 0)).is_err());
        assert!(generate_point_archive(&y, 4, 1, &NoiseModel::exp_decay(1.0, 0.5, 0.0, 0)).is_err());
        assert!(generate_point_archive(&y, 4, 1, &NoiseModel::iid(-1.0, 0)).is_err());
    }

    #[test]
    fn records_round_trip_and_errors() {
        let y = truth(30);
        let p = generate_point_archive(&y, 4, 2, &NoiseModel::iid(0.5, 2)).unwrap();
        let s = generate_scenario_archive(&p, &ScenarioGenConfig { n_scenarios: 3, noise_scale: 0.2, seed: 5 }).unwrap();
        assert_eq!(archive_from_records(&archive_records(&p), ForecastKind::Point).unwrap(), p);
        assert_eq!(archive_from_records(&archive_records(&s), ForecastKind::Scenario).unwrap(), s);

        let mut ragged = archive_records(&p);
        ragged.remove(5);
        assert!(archive_from_records(&ragged, ForecastKind::Point).is_err());

        let mut bad_spacing = archive_records(&p);
        for r in bad_spacing.iter_mut().skip(8) {
            r.origin += 1;
            r.target += 1;
        }
        let e = archive_from_records(&bad_spacing, ForecastKind::Point).unwrap_err();
        assert!(e.message.contains("spacing"), "{e}");

        let mut nan = archive_records(&p);
        nan[6].value = f64::NAN;
        assert_eq!(archive_from_records(&nan, ForecastKind::Point).unwrap_err().row, 7);
    }
}
