//! Accuracy and stability metrics for point and scenario forecasts.
//!
//! Vertical metrics compare two revisions of the same target hours
//! (origin-to-origin); horizontal metrics compare consecutive target hours of
//! one window (step-to-step). Vertical metrics average over the true overlap
//! of the two windows, so they work for any revision spacing below `H`.

use alloc::vec::Vec;

use crate::series::{overlap_region, ForecastArchive, ForecastKind, ForecastWindow, TimeSeries};
use crate::{Error, Result};

/// Mean absolute error of a point window against the truth.
pub fn mae(window: &ForecastWindow, truth: &TimeSeries) -> Result<f64> {
    mae_leads(window, truth, window.horizon())
}

fn mae_leads(window: &ForecastWindow, truth: &TimeSeries, leads: usize) -> Result<f64> {
    let forecast = window.require_point()?;
    let actual = truth.slice(window.origin() + 1, leads)?;
    Ok(actual.iter().zip(forecast).map(|(y, f)| (y - f).abs()).sum::<f64>() / leads as f64)
}

/// Vertical mean absolute change between two revisions of point forecasts.
pub fn mac_v(prev: &ForecastWindow, next: &ForecastWindow) -> Result<f64> {
    prev.require_point()?;
    next.require_point()?;
    let pairs = overlap_region(prev, next)?;
    if pairs.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(pairs.iter().map(|p| (p.next[0] - p.prev[0]).abs()).sum::<f64>() / pairs.len() as f64)
}

/// Horizontal mean absolute change inside one point window.
pub fn mac_h(window: &ForecastWindow) -> Result<f64> {
    let v = window.require_point()?;
    if v.len() < 2 {
        return Err(Error::UndefinedMetric("horizontal stability needs a horizon of at least 2"));
    }
    Ok(v.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (v.len() - 1) as f64)
}

/// Earth mover's distance between two equally sized 1-D empirical sets.
pub fn emd_1d(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SizeMismatch { left: p.len(), right: q.len() });
    }
    if p.is_empty() {
        return Err(Error::UndefinedMetric("empty sample set"));
    }
    let mut ps = p.to_vec();
    let mut qs = q.to_vec();
    ps.sort_by(f64::total_cmp);
    qs.sort_by(f64::total_cmp);
    Ok(ps.iter().zip(&qs).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64)
}

/// Vertical EMD between two revisions of scenario forecasts.
pub fn emd_v(prev: &ForecastWindow, next: &ForecastWindow) -> Result<f64> {
    prev.require_scenario()?;
    next.require_scenario()?;
    if prev.n_scenarios() != next.n_scenarios() {
        return Err(Error::SizeMismatch { left: prev.n_scenarios(), right: next.n_scenarios() });
    }
    let pairs = overlap_region(prev, next)?;
    if pairs.is_empty() {
        return Err(Error::NoOverlap);
    }
    let mut total = 0.0;
    for p in &pairs {
        total += emd_1d(p.next, p.prev)?;
    }
    Ok(total / pairs.len() as f64)
}

/// Horizontal EMD between consecutive target hours of a scenario window.
pub fn emd_h(window: &ForecastWindow) -> Result<f64> {
    window.require_scenario()?;
    let h = window.horizon();
    if h < 2 {
        return Err(Error::UndefinedMetric("horizontal stability needs a horizon of at least 2"));
    }
    let mut total = 0.0;
    for i in 2..=h {
        total += emd_1d(window.lead(i), window.lead(i - 1))?;
    }
    Ok(total / (h - 1) as f64)
}

/// Energy score of a scenario window, evaluated per target hour with the
/// scalar `|.|^p` norm and averaged over the horizon.
pub fn energy_score(window: &ForecastWindow, truth: &TimeSeries, p: f64) -> Result<f64> {
    energy_score_leads(window, truth, p, window.horizon())
}

fn energy_score_leads(window: &ForecastWindow, truth: &TimeSeries, p: f64, leads: usize) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::NumericDomain("energy score norm order must be >= 1"));
    }
    let actual = truth.slice(window.origin() + 1, leads)?;
    let mut total = 0.0;
    for (i, &y) in actual.iter().enumerate() {
        total += energy_score_hour(y, window.lead(i + 1), p)?;
    }
    Ok(total / leads as f64)
}

/// Energy score of one ensemble against one observation.
pub fn energy_score_hour(y: f64, ensemble: &[f64], p: f64) -> Result<f64> {
    let n = ensemble.len() as f64;
    let pw = |d: f64| if p == 1.0 { d.abs() } else { libm::pow(d.abs(), p) };
    let fit = ensemble.iter().map(|&f| pw(y - f)).sum::<f64>() / n;
    let mut spread = 0.0;
    for &a in ensemble {
        for &b in ensemble {
            spread += pw(a - b);
        }
    }
    let inner = fit - spread / (2.0 * n * n);
    if inner < 0.0 {
        if inner > -1e-12 * fit.max(1.0) {
            return Ok(0.0);
        }
        return Err(Error::NumericDomain("energy score inner term is negative"));
    }
    Ok(if p == 1.0 { inner } else { libm::pow(inner, 1.0 / p) })
}

/// Metric selector for archive-level evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Metric {
    /// Mean absolute error (point).
    Mae,
    /// Vertical mean absolute change (point).
    MacV,
    /// Horizontal mean absolute change (point).
    MacH,
    /// Energy score with norm order `p` (scenario).
    EnergyScore(f64),
    /// Vertical EMD (scenario).
    EmdV,
    /// Horizontal EMD (scenario).
    EmdH,
}

impl Metric {
    /// Whether the metric compares consecutive revisions.
    pub fn is_vertical(self) -> bool {
        matches!(self, Metric::MacV | Metric::EmdV)
    }

    /// Kind of archive the metric applies to.
    pub fn kind(self) -> ForecastKind {
        match self {
            Metric::Mae | Metric::MacV | Metric::MacH => ForecastKind::Point,
            _ => ForecastKind::Scenario,
        }
    }

    /// Short column name.
    pub fn name(self) -> &'static str {
        match self {
            Metric::Mae => "mae",
            Metric::MacV => "mac_v",
            Metric::MacH => "mac_h",
            Metric::EnergyScore(_) => "es",
            Metric::EmdV => "emd_v",
            Metric::EmdH => "emd_h",
        }
    }
}

fn check_kind(archive: &ForecastArchive, metric: Metric) -> Result<()> {
    if archive.kind() != metric.kind() {
        return Err(Error::WrongKind { expected: metric.kind().name() });
    }
    if metric.is_vertical() && (archive.revision_interval() >= archive.horizon() || archive.windows().len() < 2) {
        return Err(Error::NoOverlap);
    }
    Ok(())
}

fn window_metric(w: &ForecastWindow, truth: &TimeSeries, metric: Metric) -> Result<f64> {
    match metric {
        Metric::Mae => mae(w, truth),
        Metric::MacH => mac_h(w),
        Metric::EnergyScore(p) => energy_score(w, truth, p),
        Metric::EmdH => emd_h(w),
        Metric::MacV | Metric::EmdV => unreachable!("vertical metrics are pairwise"),
    }
}

fn pair_sum(archive: &ForecastArchive, metric: Metric) -> Result<(f64, usize)> {
    let mut total = 0.0;
    for pair in archive.windows().windows(2) {
        total += match metric {
            Metric::MacV => mac_v(&pair[0], &pair[1])?,
            _ => emd_v(&pair[0], &pair[1])?,
        };
    }
    Ok((total, archive.windows().len() - 1))
}

/// Mean of the per-window metric over the archive; vertical metrics average
/// over consecutive window pairs.
pub fn archive_metric(archive: &ForecastArchive, truth: &TimeSeries, metric: Metric) -> Result<f64> {
    check_kind(archive, metric)?;
    if metric.is_vertical() {
        let (total, pairs) = pair_sum(archive, metric)?;
        return Ok(total / pairs as f64);
    }
    let mut total = 0.0;
    for w in archive.windows() {
        total += window_metric(w, truth, metric)?;
    }
    Ok(total / archive.windows().len() as f64)
}

/// Metric of the forecast in force under commitment to each revision.
///
/// With revisions every `v` hours, the hours `t + 1 ..= t + v` are served by
/// the window issued at `t`, so accuracy metrics use leads `1..=v` only.
/// Vertical metrics evaluate the origin-to-origin change of the forecast in
/// force at every hour: it changes only at revision hours, so the per-pair
/// value is spread over the `v` hours of each revision period. Horizontal
/// metrics are identical to [`archive_metric`].
pub fn in_force_metric(archive: &ForecastArchive, truth: &TimeSeries, metric: Metric) -> Result<f64> {
    check_kind(archive, metric)?;
    let v = archive.revision_interval();
    let leads = v.min(archive.horizon());
    match metric {
        Metric::MacV | Metric::EmdV => {
            let (total, pairs) = pair_sum(archive, metric)?;
            Ok(total / (pairs * v) as f64)
        }
        Metric::Mae => {
            let mut total = 0.0;
            for w in archive.windows() {
                total += mae_leads(w, truth, leads)?;
            }
            Ok(total / archive.windows().len() as f64)
        }
        Metric::EnergyScore(p) => {
            let mut total = 0.0;
            for w in archive.windows() {
                total += energy_score_leads(w, truth, p, leads)?;
            }
            Ok(total / archive.windows().len() as f64)
        }
        Metric::MacH | Metric::EmdH => archive_metric(archive, truth, metric),
    }
}

/// Sample Pearson correlation. A series whose spread is at rounding level
/// (below 1e-12 of its magnitude) counts as constant.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::SizeMismatch { left: xs.len(), right: ys.len() });
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let flat = |ss: f64, v: &[f64]| {
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        ss == 0.0 || libm::sqrt(ss / n) <= 1e-12 * scale
    };
    if flat(sxx, xs) || flat(syy, ys) {
        return Err(Error::UndefinedCorrelation);
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// All metrics of one archive, used by the experiment recipes.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArchiveMetrics {
    /// MAE or energy score over full windows.
    pub accuracy: f64,
    /// Vertical stability over window pairs (`None` without overlap).
    pub vertical: Option<f64>,
    /// Horizontal stability.
    pub horizontal: Option<f64>,
    /// Accuracy of the forecast in force (leads `1..=v`).
    pub accuracy_in_force: f64,
    /// Hourly vertical change of the forecast in force.
    pub vertical_in_force: Option<f64>,
}

/// Evaluates accuracy, vertical and horizontal stability in both scopes.
pub fn evaluate_archive(archive: &ForecastArchive, truth: &TimeSeries, es_p: f64) -> Result<ArchiveMetrics> {
    let (acc, vert, horiz) = match archive.kind() {
        ForecastKind::Point => (Metric::Mae, Metric::MacV, Metric::MacH),
        ForecastKind::Scenario => (Metric::EnergyScore(es_p), Metric::EmdV, Metric::EmdH),
    };
    let optional = |r: Result<f64>| match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoOverlap | Error::UndefinedMetric(_)) => Ok(None),
        Err(e) => Err(e),
    };
    Ok(ArchiveMetrics {
        accuracy: archive_metric(archive, truth, acc)?,
        vertical: optional(archive_metric(archive, truth, vert))?,
        horizontal: optional(archive_metric(archive, truth, horiz))?,
        accuracy_in_force: in_force_metric(archive, truth, acc)?,
        vertical_in_force: optional(in_force_metric(archive, truth, vert))?,
    })
}

/// Averages metric sets (e.g. over buildings).
pub fn mean_metrics(items: &[ArchiveMetrics]) -> ArchiveMetrics {
    let n = items.len() as f64;
    let avg = |f: &dyn Fn(&ArchiveMetrics) -> f64| items.iter().map(f).sum::<f64>() / n;
    let avg_opt = |f: &dyn Fn(&ArchiveMetrics) -> Option<f64>| {
        items.iter().map(f).collect::<Option<Vec<_>>>().map(|v| v.iter().sum::<f64>() / n)
    };
    ArchiveMetrics {
        accuracy: avg(&|m| m.accuracy),
        vertical: avg_opt(&|m| m.vertical),
        horizontal: avg_opt(&|m| m.horizontal),
        accuracy_in_force: avg(&|m| m.accuracy_in_force),
        vertical_in_force: avg_opt(&|m| m.vertical_in_force),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn point(origin: i64, v: &[f64]) -> ForecastWindow {
        ForecastWindow::point(origin, v.to_vec()).unwrap()
    }

    fn scen(origin: i64, rows: &[&[f64]]) -> ForecastWindow {
        ForecastWindow::scenarios(origin, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn mae_examples() {
        let y = TimeSeries::new(0, vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(mae(&point(0, &[1.0, 2.0]), &y).unwrap(), 0.0);
        assert_eq!(mae(&point(0, &[2.0, 4.0]), &y).unwrap(), 1.5);
        assert_eq!(mae(&point(0, &[1.75, 2.75]), &y).unwrap(), 0.75);
        assert_eq!(mae(&scen(0, &[&[1.0, 2.0]]), &y), Err(Error::WrongKind { expected: "point" }));
        assert!(matches!(mae(&point(1, &[1.0, 2.0]), &y), Err(Error::Coverage { .. })));
    }

    #[test]
    fn mac_examples() {
        // prev covers t+1, t+2 with 1 and 5; next predicts 2, 4 for them
        let prev = point(-1, &[9.0, 1.0, 5.0]);
        let next = point(0, &[2.0, 4.0, 7.0]);
        assert_eq!(mac_v(&prev, &next).unwrap(), 1.0);
        assert_eq!(mac_v(&next, &point(1, &[4.0, 7.0, 0.0])).unwrap(), 0.0);
        assert_eq!(mac_v(&point(0, &[1.0, 2.0]), &point(2, &[1.0, 2.0])), Err(Error::NoOverlap));
        assert_eq!(mac_h(&point(0, &[1.0, 3.0, 2.0])).unwrap(), 1.5);
        assert_eq!(mac_h(&point(0, &[4.0, 4.0, 4.0])).unwrap(), 0.0);
        assert_eq!(mac_h(&point(0, &[1.0, -1.5, -4.0, -6.5])).unwrap(), 2.5);
        assert!(matches!(mac_h(&point(0, &[1.0])), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn mac_v_overlap_count_for_spacing_8() {
        let prev = point(0, &[0.0; 24]);
        let next = point(8, &[1.0; 24]);
        assert_eq!(overlap_region(&prev, &next).unwrap().len(), 16);
        assert_eq!(mac_v(&prev, &next).unwrap(), 1.0);
    }

    #[test]
    fn emd_examples() {
        assert_eq!(emd_1d(&[0.0, 1.0], &[1.0, 2.0]).unwrap(), 1.0);
        assert_eq!(emd_1d(&[3.0, 1.0], &[1.0, 3.0]).unwrap(), 0.0);
        assert_eq!(emd_1d(&[1.0], &[1.0, 2.0]), Err(Error::SizeMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn emd_window_examples() {
        let a = scen(0, &[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]);
        let b = scen(1, &[&[4.0, 5.0, 8.0], &[7.0, 8.0, 9.0]]);
        assert_eq!(emd_v(&a, &b).unwrap(), 2.0);
        let b_perm = scen(1, &[&[7.0, 8.0, 9.0], &[4.0, 5.0, 8.0]]);
        assert_eq!(emd_v(&a, &b_perm).unwrap(), 2.0);
        assert_eq!(emd_h(&scen(0, &[&[0.0, 10.0], &[10.0, 0.0]])).unwrap(), 0.0);
        assert_eq!(emd_h(&scen(0, &[&[2.0, 2.0], &[5.0, 5.0]])).unwrap(), 0.0);
        assert_eq!(emd_h(&scen(0, &[&[1.0, 3.0, 2.0]])).unwrap(), 1.5);
        let n3 = scen(1, &[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        assert!(matches!(emd_v(&a, &n3), Err(Error::SizeMismatch { .. })));
        assert!(matches!(emd_h(&scen(0, &[&[1.0]])), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn energy_score_examples() {
        let y = TimeSeries::new(0, vec![0.0, 0.0, 3.0]).unwrap();
        let w = scen(0, &[&[-1.0, 3.0], &[1.0, 3.0]]);
        // hour 1: 0.5 by hand; hour 2: all scenarios exact
        assert_eq!(energy_score(&w, &y, 1.0).unwrap(), 0.25);
        let single = scen(0, &[&[2.0, 1.0]]);
        assert_eq!(energy_score(&single, &y, 1.0).unwrap(), 2.0);
        assert!(energy_score(&w, &y, 0.5).is_err());
        // p = 2 reduces to |y - mean|
        assert!((energy_score_hour(1.0, &[0.0, 4.0], 2.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert_eq!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::UndefinedCorrelation));
        let ulps = [0.9088092914355859, 0.9088092914355859, 0.9088092914355856];
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &ulps), Err(Error::UndefinedCorrelation));
    }

    #[test]
    fn archive_metric_examples() {
        let y = TimeSeries::new(0, (0..10).map(|h| h as f64).collect()).unwrap();
        let w = |o: i64, off: f64| point(o, &[(o + 1) as f64 + off, (o + 2) as f64 + off, (o + 3) as f64 + off]);
        let arch = ForecastArchive::new(1, vec![w(0, 1.0), w(1, -2.0), w(2, 0.5)]).unwrap();
        assert!((archive_metric(&arch, &y, Metric::Mae).unwrap() - (1.0 + 2.0 + 0.5) / 3.0).abs() < 1e-12);
        assert!((archive_metric(&arch, &y, Metric::MacV).unwrap() - (3.0 + 2.5) / 2.0).abs() < 1e-12);
        assert_eq!(archive_metric(&arch, &y, Metric::MacH).unwrap(), 1.0);
        // in force with v = 1: only lead 1 counts
        assert!((in_force_metric(&arch, &y, Metric::Mae).unwrap() - 3.5 / 3.0).abs() < 1e-12);

        let perfect = ForecastArchive::new(1, vec![w(0, 0.0), w(1, 0.0)]).unwrap();
        assert_eq!(archive_metric(&perfect, &y, Metric::Mae).unwrap(), 0.0);
        assert_eq!(archive_metric(&perfect, &y, Metric::MacV).unwrap(), 0.0);

        let single = ForecastArchive::new(1, vec![w(0, 0.0)]).unwrap();
        assert_eq!(archive_metric(&single, &y, Metric::MacV), Err(Error::NoOverlap));
        let sparse = ForecastArchive::new(3, vec![w(0, 0.0), w(3, 0.0)]).unwrap();
        assert_eq!(archive_metric(&sparse, &y, Metric::MacV), Err(Error::NoOverlap));
        assert_eq!(archive_metric(&sparse, &y, Metric::EmdH), Err(Error::WrongKind { expected: "scenario" }));
    }

    #[test]
    fn in_force_vertical_spreads_change_over_period() {
        let y = TimeSeries::new(0, vec![0.0; 12]).unwrap();
        let arch = ForecastArchive::new(2, vec![point(0, &[0.0; 4]), point(2, &[1.0; 4]), point(4, &[3.0; 4])]).unwrap();
        assert_eq!(archive_metric(&arch, &y, Metric::MacV).unwrap(), 1.5);
        assert_eq!(in_force_metric(&arch, &y, Metric::MacV).unwrap(), 0.75);
        assert_eq!(in_force_metric(&arch, &y, Metric::Mae).unwrap(), 4.0 / 3.0);
    }
}
