//! Time-indexed value types shared by every module.
//!
//! Hours are absolute `i64` indices. A forecast window issued at origin `t`
//! predicts the hours `t + 1 ..= t + H`; the origin hour itself is observed.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::{Error, Result};

/// Hourly series starting at an absolute hour.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeSeries {
    start: i64,
    values: Vec<f64>,
}

impl TimeSeries {
    /// Builds a series; values must be non-empty and finite.
    pub fn new(start: i64, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("time series must not be empty".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at hour {}", start + i as i64)));
        }
        Ok(TimeSeries { start, values })
    }

    /// First covered hour.
    pub fn start(&self) -> i64 {
        self.start
    }

    /// One past the last covered hour.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64
    }

    /// Covered hours.
    pub fn hours(&self) -> Range<i64> {
        self.start..self.end()
    }

    /// Number of values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; series are non-empty by construction.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All values in hour order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value at absolute hour `t`, if covered.
    pub fn get(&self, t: i64) -> Option<f64> {
        if self.hours().contains(&t) {
            Some(self.values[(t - self.start) as usize])
        } else {
            None
        }
    }

    /// Value at `t`, or a coverage error.
    pub fn at(&self, t: i64) -> Result<f64> {
        self.get(t).ok_or(Error::Coverage { from: t, to: t + 1 })
    }

    /// The `len` values starting at absolute hour `from`.
    pub fn slice(&self, from: i64, len: usize) -> Result<&[f64]> {
        let to = from + len as i64;
        if from < self.start || to > self.end() {
            let missing_from = if from < self.start { from } else { self.end().max(from) };
            let missing_to = if to > self.end() { to } else { self.start.min(to) };
            return Err(Error::Coverage { from: missing_from, to: missing_to });
        }
        let i = (from - self.start) as usize;
        Ok(&self.values[i..i + len])
    }

    /// Checks that `[from, to)` is covered.
    pub fn require(&self, from: i64, to: i64) -> Result<()> {
        self.slice(from, (to - from).max(0) as usize).map(|_| ())
    }
}

/// Point or scenario forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ForecastKind {
    /// One value per target hour.
    Point,
    /// `N` equally weighted scenarios per target hour.
    Scenario,
}

impl ForecastKind {
    /// Lower-case name.
    pub fn name(self) -> &'static str {
        match self {
            ForecastKind::Point => "point",
            ForecastKind::Scenario => "scenario",
        }
    }
}

/// One forecast issued at `origin` for the `horizon` following hours.
///
/// Values are stored target-major: the `N` scenario values for lead `i` are
/// contiguous, so a point forecast is simply the `N = 1` layout.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForecastWindow {
    origin: i64,
    horizon: usize,
    kind: ForecastKind,
    n_scenarios: usize,
    data: Vec<f64>,
}

impl ForecastWindow {
    /// Point forecast for hours `origin + 1 ..= origin + values.len()`.
    pub fn point(origin: i64, values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        if values.is_empty() {
            return Err(Error::Invalid("forecast horizon must be at least 1".into()));
        }
        Ok(ForecastWindow { origin, horizon: values.len(), kind: ForecastKind::Point, n_scenarios: 1, data: values })
    }

    /// Scenario forecast from `N` rows of `H` values each.
    pub fn scenarios(origin: i64, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Invalid("scenario forecast needs at least one scenario".into()));
        }
        let horizon = rows[0].len();
        if horizon == 0 {
            return Err(Error::Invalid("forecast horizon must be at least 1".into()));
        }
        if let Some(j) = rows.iter().position(|r| r.len() != horizon) {
            return Err(Error::Invalid(format!(
                "scenario {j} has {} values, expected {horizon}",
                rows[j].len()
            )));
        }
        let mut data = Vec::with_capacity(n * horizon);
        for i in 0..horizon {
            data.extend(rows.iter().map(|r| r[i]));
        }
        check_finite(&data)?;
        Ok(ForecastWindow { origin, horizon, kind: ForecastKind::Scenario, n_scenarios: n, data })
    }

    /// Scenario forecast from target-major data (`data[i * n + j]`).
    pub fn scenarios_target_major(origin: i64, n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || data.is_empty() || data.len() % n != 0 {
            return Err(Error::Invalid("scenario data must be a non-empty multiple of N".into()));
        }
        check_finite(&data)?;
        Ok(ForecastWindow { origin, horizon: data.len() / n, kind: ForecastKind::Scenario, n_scenarios: n, data })
    }

    /// Issue hour.
    pub fn origin(&self) -> i64 {
        self.origin
    }

    /// Number of predicted hours.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Point or scenario.
    pub fn kind(&self) -> ForecastKind {
        self.kind
    }

    /// Scenario count (1 for point forecasts).
    pub fn n_scenarios(&self) -> usize {
        self.n_scenarios
    }

    /// Predicted hours.
    pub fn targets(&self) -> Range<i64> {
        self.origin + 1..self.origin + 1 + self.horizon as i64
    }

    /// Point values, or `None` for a scenario window.
    pub fn point_values(&self) -> Option<&[f64]> {
        match self.kind {
            ForecastKind::Point => Some(&self.data),
            ForecastKind::Scenario => None,
        }
    }

    /// Point values or a wrong-kind error.
    pub fn require_point(&self) -> Result<&[f64]> {
        self.point_values().ok_or(Error::WrongKind { expected: "point" })
    }

    /// Errors unless this is a scenario window.
    pub fn require_scenario(&self) -> Result<()> {
        match self.kind {
            ForecastKind::Scenario => Ok(()),
            ForecastKind::Point => Err(Error::WrongKind { expected: "scenario" }),
        }
    }

    /// Values for lead `i` (1-based), one per scenario.
    pub fn lead(&self, i: usize) -> &[f64] {
        let n = self.n_scenarios;
        &self.data[(i - 1) * n..i * n]
    }

    /// Values for absolute target hour `t`, if predicted.
    pub fn marginal(&self, t: i64) -> Option<&[f64]> {
        let i = t - self.origin;
        if i >= 1 && i <= self.horizon as i64 {
            Some(self.lead(i as usize))
        } else {
            None
        }
    }

    /// Scenario `j` as a trajectory over the horizon.
    pub fn scenario_row(&self, j: usize) -> Vec<f64> {
        (1..=self.horizon).map(|i| self.lead(i)[j]).collect()
    }

    /// Target-major raw data.
    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Invalid("forecast values must be finite".into()))
    }
}

/// Forecast values of two windows at one shared target hour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapPair<'a> {
    /// Absolute target hour.
    pub hour: i64,
    /// Values from the earlier window (one per scenario).
    pub prev: &'a [f64],
    /// Values from the later window.
    pub next: &'a [f64],
}

/// Pairs the predictions of two windows on every target hour both cover.
/// Empty when the origin spacing is at least the horizon.
pub fn overlap_region<'a>(prev: &'a ForecastWindow, next: &'a ForecastWindow) -> Result<Vec<OverlapPair<'a>>> {
    if prev.kind != next.kind || prev.horizon != next.horizon {
        return Err(Error::IncompatibleWindows(format!(
            "{} H={} vs {} H={}",
            prev.kind.name(),
            prev.horizon,
            next.kind.name(),
            next.horizon
        )));
    }
    if prev.origin >= next.origin {
        return Err(Error::IncompatibleWindows(format!(
            "origins must increase ({} then {})",
            prev.origin, next.origin
        )));
    }
    let from = next.targets().start;
    let to = prev.targets().end;
    Ok((from..to)
        .map(|hour| OverlapPair {
            hour,
            prev: prev.marginal(hour).expect("inside prev window"),
            next: next.marginal(hour).expect("inside next window"),
        })
        .collect())
}

/// Rolling-origin forecasts with constant revision spacing.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ForecastArchive {
    horizon: usize,
    revision_interval: usize,
    windows: Vec<ForecastWindow>,
}

impl ForecastArchive {
    /// Validates spacing, horizon, kind and scenario count.
    pub fn new(revision_interval: usize, windows: Vec<ForecastWindow>) -> Result<Self> {
        if revision_interval == 0 {
            return Err(Error::Invalid("revision interval must be at least 1".into()));
        }
        let first = windows.first().ok_or_else(|| Error::Invalid("archive has no windows".into()))?;
        let (horizon, kind, n) = (first.horizon, first.kind, first.n_scenarios);
        for (k, pair) in windows.windows(2).enumerate() {
            if pair[1].origin - pair[0].origin != revision_interval as i64 {
                return Err(Error::Invalid(format!(
                    "window {} origin {} does not follow {} by {revision_interval}",
                    k + 1,
                    pair[1].origin,
                    pair[0].origin
                )));
            }
        }
        if let Some(w) = windows.iter().find(|w| w.horizon != horizon || w.kind != kind || w.n_scenarios != n) {
            return Err(Error::Invalid(format!("window at origin {} differs in horizon, kind or N", w.origin)));
        }
        Ok(ForecastArchive { horizon, revision_interval, windows })
    }

    /// Common horizon `H`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Origin spacing `v_F`.
    pub fn revision_interval(&self) -> usize {
        self.revision_interval
    }

    /// Common kind.
    pub fn kind(&self) -> ForecastKind {
        self.windows[0].kind
    }

    /// Common scenario count.
    pub fn n_scenarios(&self) -> usize {
        self.windows[0].n_scenarios
    }

    /// Windows in origin order.
    pub fn windows(&self) -> &[ForecastWindow] {
        &self.windows
    }

    /// First origin.
    pub fn first_origin(&self) -> i64 {
        self.windows[0].origin
    }

    /// Last origin.
    pub fn last_origin(&self) -> i64 {
        self.windows[self.windows.len() - 1].origin
    }

    /// Newest window issued at or before hour `t`.
    pub fn latest_at(&self, t: i64) -> Option<&ForecastWindow> {
        if t < self.first_origin() {
            return None;
        }
        let k = ((t - self.first_origin()) / self.revision_interval as i64) as usize;
        self.windows.get(k.min(self.windows.len() - 1))
    }
}
