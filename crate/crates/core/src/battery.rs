//! District environment: building traces, battery dynamics, plan execution
//! and KPI scoring against the no-battery baseline.
//!
//! Sign convention: `charge >= 0` is energy drawn from the grid into the
//! battery, `discharge <= 0` is energy delivered to the grid. The state of
//! charge follows `soc' = soc + eta_c * charge + discharge / eta_d`, so a
//! discharge always lowers it.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::rng::{stream, Stream};
use crate::series::TimeSeries;
use crate::{Error, Result, HOURS_PER_MONTH};

/// Adjustments smaller than this (kWh) are numerical noise, not clips.
pub const CLIP_TOL: f64 = 1e-6;

/// Battery parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct BatterySpec {
    /// Energy capacity, kWh.
    pub capacity: f64,
    /// Lowest allowed state of charge, kWh.
    pub soc_min: f64,
    /// Highest allowed state of charge, kWh.
    pub soc_max: f64,
    /// Per-hour energy limit, kWh.
    pub p_max: f64,
    /// Charging efficiency in `(0, 1]`.
    pub eta_charge: f64,
    /// Discharging efficiency in `(0, 1]`.
    pub eta_discharge: f64,
    /// State of charge at the start of a run, kWh.
    pub initial_soc: f64,
}

impl Default for BatterySpec {
    fn default() -> Self {
        BatterySpec {
            capacity: 6.4,
            soc_min: 0.0,
            soc_max: 6.4,
            p_max: 2.0,
            eta_charge: 0.95,
            eta_discharge: 0.95,
            initial_soc: 0.0,
        }
    }
}

impl BatterySpec {
    /// Checks all parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let ok = self.capacity > 0.0
            && 0.0 <= self.soc_min
            && self.soc_min < self.soc_max
            && self.soc_max <= self.capacity
            && self.p_max > 0.0
            && self.eta_charge > 0.0
            && self.eta_charge <= 1.0
            && self.eta_discharge > 0.0
            && self.eta_discharge <= 1.0
            && self.soc_min <= self.initial_soc
            && self.initial_soc <= self.soc_max;
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid battery spec {self:?}")))
        }
    }

    /// State of charge after `action` from `soc`, without clipping.
    pub fn next_soc(&self, soc: f64, action: Action) -> f64 {
        soc + self.eta_charge * action.charge + action.discharge / self.eta_discharge
    }
}

/// One building: load, PV generation and battery.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Building {
    /// Electric load, kWh per hour.
    pub load: TimeSeries,
    /// PV generation, kWh per hour.
    pub pv: TimeSeries,
    /// Battery.
    pub battery: BatterySpec,
}

/// All traces driving a simulation.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvironmentSeries {
    /// Buildings of the district.
    pub buildings: Vec<Building>,
    /// Electricity price, $/kWh.
    pub price: TimeSeries,
    /// Carbon intensity, kgCO2e/kWh.
    pub carbon: TimeSeries,
}

impl EnvironmentSeries {
    /// Validates alignment, signs and battery parameters.
    pub fn new(buildings: Vec<Building>, price: TimeSeries, carbon: TimeSeries) -> Result<Self> {
        if buildings.is_empty() {
            return Err(Error::Invalid("environment needs at least one building".into()));
        }
        let hours = price.hours();
        if carbon.hours() != hours {
            return Err(Error::Invalid("price and carbon series are not aligned".into()));
        }
        for (b, bld) in buildings.iter().enumerate() {
            if bld.load.hours() != hours || bld.pv.hours() != hours {
                return Err(Error::Invalid(format!("building {b} series are not aligned with price")));
            }
            if bld.load.values().iter().chain(bld.pv.values()).any(|v| *v < 0.0) {
                return Err(Error::Invalid(format!("building {b} has negative load or pv")));
            }
            bld.battery.validate()?;
        }
        if price.values().iter().chain(carbon.values()).any(|v| *v < 0.0) {
            return Err(Error::Invalid("price and carbon must be non-negative".into()));
        }
        Ok(EnvironmentSeries { buildings, price, carbon })
    }

    /// First covered hour.
    pub fn start(&self) -> i64 {
        self.price.start()
    }

    /// One past the last covered hour.
    pub fn end(&self) -> i64 {
        self.price.end()
    }

    /// Number of buildings.
    pub fn n_buildings(&self) -> usize {
        self.buildings.len()
    }

    /// Load minus PV of building `b`.
    pub fn net_base(&self, b: usize) -> TimeSeries {
        let bld = &self.buildings[b];
        let v = bld.load.values().iter().zip(bld.pv.values()).map(|(l, p)| l - p).collect();
        TimeSeries::new(bld.load.start(), v).expect("finite by construction")
    }

    /// District net load at hour `t` without any battery action.
    pub fn district_base(&self, t: i64) -> Result<f64> {
        let mut total = 0.0;
        for bld in &self.buildings {
            total += bld.load.at(t)? - bld.pv.at(t)?;
        }
        Ok(total)
    }

    /// Initial states of charge.
    pub fn initial_soc(&self) -> Vec<f64> {
        self.buildings.iter().map(|b| b.battery.initial_soc).collect()
    }

    /// Restricts every series to `[from, to)`.
    pub fn window(&self, from: i64, to: i64) -> Result<Self> {
        let len = (to - from).max(0) as usize;
        let cut = |s: &TimeSeries| -> Result<TimeSeries> { TimeSeries::new(from, s.slice(from, len)?.to_vec()) };
        let buildings = self
            .buildings
            .iter()
            .map(|b| Ok(Building { load: cut(&b.load)?, pv: cut(&b.pv)?, battery: b.battery }))
            .collect::<Result<Vec<_>>>()?;
        EnvironmentSeries::new(buildings, cut(&self.price)?, cut(&self.carbon)?)
    }
}

/// Battery energy for one hour, split into charge and discharge parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Action {
    /// Grid energy into the battery, `>= 0`.
    pub charge: f64,
    /// Energy delivered to the grid, `<= 0`.
    pub discharge: f64,
}

impl Action {
    /// No battery use.
    pub const IDLE: Action = Action { charge: 0.0, discharge: 0.0 };

    /// Signed grid-side energy `x = x_pos + x_neg`.
    pub fn net(self) -> f64 {
        self.charge + self.discharge
    }

    /// Splits a signed energy into its charge/discharge parts.
    pub fn from_net(x: f64) -> Self {
        if x >= 0.0 {
            Action { charge: x, discharge: 0.0 }
        } else {
            Action { charge: 0.0, discharge: x }
        }
    }

    /// Component-wise mean.
    pub fn mean(actions: &[Action]) -> Action {
        let n = actions.len() as f64;
        Action {
            charge: actions.iter().map(|a| a.charge).sum::<f64>() / n,
            discharge: actions.iter().map(|a| a.discharge).sum::<f64>() / n,
        }
    }
}

/// Committed actions per building, starting at hour `start`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plan {
    /// First hour the plan controls.
    pub start: i64,
    /// `actions[b][k]` applies to building `b` at hour `start + k`.
    pub actions: Vec<Vec<Action>>,
}

impl Plan {
    /// Number of planned hours.
    pub fn len(&self) -> usize {
        self.actions.first().map_or(0, Vec::len)
    }

    /// Whether the plan is empty.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All-idle plan for `n_buildings` over `hours` hours.
    pub fn idle(start: i64, n_buildings: usize, hours: usize) -> Self {
        Plan { start, actions: vec![vec![Action::IDLE; hours]; n_buildings] }
    }

    /// Actions of every building at plan offset `k`.
    pub fn at(&self, k: usize) -> Vec<Action> {
        self.actions.iter().map(|a| a[k]).collect()
    }
}

/// Executed simulation record.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationTrace {
    /// First simulated hour.
    pub start: i64,
    /// District net load per hour.
    pub net_load: Vec<f64>,
    /// State of charge per building, `hours + 1` entries (initial first).
    pub soc: Vec<Vec<f64>>,
    /// Executed (post-clip) actions per building.
    pub actions: Vec<Vec<Action>>,
    /// `max(0, E * price)` per hour.
    pub price_cost: Vec<f64>,
    /// `max(0, E * carbon)` per hour.
    pub carbon_cost: Vec<f64>,
    /// Number of clipped actions.
    pub clips: usize,
}

impl SimulationTrace {
    /// Number of simulated hours.
    pub fn len(&self) -> usize {
        self.net_load.len()
    }

    /// Whether no hour was simulated.
    pub fn is_empty(&self) -> bool {
        self.net_load.is_empty()
    }

    /// Hour after the last simulated one.
    pub fn end(&self) -> i64 {
        self.start + self.len() as i64
    }

    /// Electricity plus weighted carbon cost plus `beta` times the ramping.
    pub fn realized_cost(&self, beta: f64, w_co2: f64) -> f64 {
        self.price_cost.iter().sum::<f64>() + w_co2 * self.carbon_cost.iter().sum::<f64>() + beta * ramping(&self.net_load)
    }
}

/// Steps batteries through hours, clipping infeasible actions.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    env: &'a EnvironmentSeries,
    soc: Vec<f64>,
    trace: SimulationTrace,
}

impl<'a> Simulator<'a> {
    /// Starts at hour `start` with the given states of charge.
    pub fn new(env: &'a EnvironmentSeries, start: i64, soc0: &[f64]) -> Result<Self> {
        if soc0.len() != env.n_buildings() {
            return Err(Error::SizeMismatch { left: soc0.len(), right: env.n_buildings() });
        }
        for (b, (&s, bld)) in soc0.iter().zip(&env.buildings).enumerate() {
            if !(s >= 0.0) || s < bld.battery.soc_min - CLIP_TOL || s > bld.battery.soc_max + CLIP_TOL {
                return Err(Error::Invalid(format!("initial SOC {s} of building {b} outside battery limits")));
            }
        }
        let n = env.n_buildings();
        Ok(Simulator {
            env,
            soc: soc0.to_vec(),
            trace: SimulationTrace {
                start,
                net_load: Vec::new(),
                soc: soc0.iter().map(|&s| vec![s]).collect(),
                actions: vec![Vec::new(); n],
                price_cost: Vec::new(),
                carbon_cost: Vec::new(),
                clips: 0,
            },
        })
    }

    /// Next hour to be simulated.
    pub fn hour(&self) -> i64 {
        self.trace.end()
    }

    /// Current states of charge.
    pub fn soc(&self) -> &[f64] {
        &self.soc
    }

    /// Net load of the last simulated hour, if any.
    pub fn last_net_load(&self) -> Option<f64> {
        self.trace.net_load.last().copied()
    }

    /// Executes one hour and returns the district net load.
    pub fn step(&mut self, actions: &[Action]) -> Result<f64> {
        let t = self.hour();
        let mut net = 0.0;
        for (b, bld) in self.env.buildings.iter().enumerate() {
            let (executed, soc, clipped) = clip_action(&bld.battery, self.soc[b], actions[b]);
            self.soc[b] = soc;
            self.trace.clips += clipped as usize;
            self.trace.soc[b].push(soc);
            self.trace.actions[b].push(executed);
            net += bld.load.at(t)? - bld.pv.at(t)? + executed.net();
        }
        let price = self.env.price.at(t)?;
        let carbon = self.env.carbon.at(t)?;
        self.trace.net_load.push(net);
        self.trace.price_cost.push((net * price).max(0.0));
        self.trace.carbon_cost.push((net * carbon).max(0.0));
        Ok(net)
    }

    /// Finishes the run.
    pub fn finish(self) -> SimulationTrace {
        self.trace
    }
}

const SOC_SLACK: f64 = 1e-12;

/// Projects `action` onto the power and SOC limits. Returns the executed
/// action, the new SOC and whether the adjustment exceeded [`CLIP_TOL`].
pub fn clip_action(spec: &BatterySpec, soc: f64, action: Action) -> (Action, f64, bool) {
    let mut a = Action {
        charge: action.charge.clamp(0.0, spec.p_max),
        discharge: action.discharge.clamp(-spec.p_max, 0.0),
    };
    let mut next = spec.next_soc(soc, a);
    // rounding-level overshoot is absorbed by the SOC clamp, which keeps
    // clipping idempotent
    if next > spec.soc_max + SOC_SLACK {
        let excess = next - spec.soc_max;
        a.charge = (a.charge - excess / spec.eta_charge).max(0.0);
        next = spec.next_soc(soc, a);
    }
    if next < spec.soc_min - SOC_SLACK {
        let deficit = spec.soc_min - next;
        a.discharge = (a.discharge + deficit * spec.eta_discharge).min(0.0);
        next = spec.next_soc(soc, a);
    }
    let moved = (a.charge - action.charge).abs() + (a.discharge - action.discharge).abs();
    (a, next.clamp(spec.soc_min, spec.soc_max), moved > CLIP_TOL)
}

/// Executes `plan` from `soc0`.
pub fn execute(env: &EnvironmentSeries, plan: &Plan, soc0: &[f64]) -> Result<SimulationTrace> {
    if plan.actions.len() != env.n_buildings() {
        return Err(Error::SizeMismatch { left: plan.actions.len(), right: env.n_buildings() });
    }
    env.price.require(plan.start, plan.start + plan.len() as i64)?;
    let mut sim = Simulator::new(env, plan.start, soc0)?;
    for k in 0..plan.len() {
        sim.step(&plan.at(k))?;
    }
    Ok(sim.finish())
}

/// Sum of absolute hour-to-hour changes.
pub fn ramping(net_load: &[f64]) -> f64 {
    net_load.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Mean over 730-hour months of `monthly mean / monthly max`. Months whose
/// maximum is not positive count as perfectly flat (ratio 1).
pub fn load_factor(net_load: &[f64]) -> Result<f64> {
    if net_load.len() < HOURS_PER_MONTH || !net_load.len().is_multiple_of(HOURS_PER_MONTH) {
        return Err(Error::Period(format!(
            "load factor needs a whole number of {HOURS_PER_MONTH}-hour months, got {} hours",
            net_load.len()
        )));
    }
    let months = net_load.chunks_exact(HOURS_PER_MONTH);
    let n = months.len() as f64;
    let total: f64 = months
        .map(|m| {
            let max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if max > 0.0 {
                m.iter().sum::<f64>() / (HOURS_PER_MONTH as f64 * max)
            } else {
                1.0
            }
        })
        .sum();
    Ok(total / n)
}

fn ratio(entry: f64, baseline: f64, what: &str) -> Result<f64> {
    if entry == baseline {
        Ok(1.0)
    } else if baseline == 0.0 {
        Err(Error::NumericDomain(match what {
            "c" => "no-battery electricity cost is zero",
            "g" => "no-battery emissions are zero",
            "r" => "no-battery ramping is zero",
            _ => "no-battery load factor is one",
        }))
    } else {
        Ok(entry / baseline)
    }
}

/// Raw (un-normalised) KPI values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawKpis {
    /// Electricity cost `sum max(0, E * T)`.
    pub c: f64,
    /// Emissions `sum max(0, E * O)`.
    pub g: f64,
    /// Ramping `sum |E_t - E_{t-1}|`.
    pub ramping: f64,
    /// Load factor (only with grid KPIs).
    pub load_factor: Option<f64>,
}

/// Grid-related KPIs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridKpis {
    /// Normalised ramping `R / R_baseline`.
    pub ramping: f64,
    /// Normalised load-factor penalty `(1 - L) / (1 - L_baseline)`.
    pub load_factor: f64,
    /// Grid score `D`, mean of the two above.
    pub grid: f64,
}

/// Scores of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KpiReport {
    /// Normalised electricity cost `C`.
    pub cost: f64,
    /// Normalised emissions `G`.
    pub emissions: f64,
    /// Grid KPIs, when requested.
    pub grid: Option<GridKpis>,
    /// Mean of `C` and `G`.
    pub avg_score: f64,
    /// Mean of `C`, `G` and `D`, when grid KPIs are requested.
    pub avg_score_with_grid: Option<f64>,
    /// Raw values of the run.
    pub entry: RawKpis,
    /// Raw values of the no-battery baseline.
    pub baseline: RawKpis,
}

fn raw_kpis(env: &EnvironmentSeries, start: i64, net: &[f64], include_grid: bool) -> Result<RawKpis> {
    let price = env.price.slice(start, net.len())?;
    let carbon = env.carbon.slice(start, net.len())?;
    let c = net.iter().zip(price).map(|(e, t)| (e * t).max(0.0)).sum();
    let g = net.iter().zip(carbon).map(|(e, o)| (e * o).max(0.0)).sum();
    let load_factor = if include_grid { Some(load_factor(net)?) } else { None };
    Ok(RawKpis { c, g, ramping: ramping(net), load_factor })
}

/// Scores `trace` against the zero-action baseline over the same hours.
pub fn score(trace: &SimulationTrace, env: &EnvironmentSeries, include_grid: bool) -> Result<KpiReport> {
    if trace.is_empty() {
        return Err(Error::Period("empty trace".into()));
    }
    let baseline_net = (trace.start..trace.end()).map(|t| env.district_base(t)).collect::<Result<Vec<_>>>()?;
    let entry = raw_kpis(env, trace.start, &trace.net_load, include_grid)?;
    let baseline = raw_kpis(env, trace.start, &baseline_net, include_grid)?;
    let cost = ratio(entry.c, baseline.c, "c")?;
    let emissions = ratio(entry.g, baseline.g, "g")?;
    let avg_score = (cost + emissions) / 2.0;
    let grid = if include_grid {
        let r = ratio(entry.ramping, baseline.ramping, "r")?;
        let l = ratio(
            1.0 - entry.load_factor.expect("requested"),
            1.0 - baseline.load_factor.expect("requested"),
            "l",
        )?;
        Some(GridKpis { ramping: r, load_factor: l, grid: (r + l) / 2.0 })
    } else {
        None
    };
    Ok(KpiReport {
        cost,
        emissions,
        grid,
        avg_score,
        avg_score_with_grid: grid.map(|d| (cost + emissions + d.grid) / 3.0),
        entry,
        baseline,
    })
}

/// Parameters of the synthetic district generator.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SyntheticEnvConfig {
    /// Number of buildings.
    pub n_buildings: usize,
    /// Requested days; rounded up to whole 730-hour months.
    pub n_days: usize,
    /// Extra hours appended after the scoring months (forecast lookahead).
    pub tail_hours: usize,
    /// Seed of the environment stream.
    pub seed: u64,
    /// Mean hourly load, kWh.
    pub load_mean: f64,
    /// Relative daily load swing.
    pub load_amplitude: f64,
    /// Relative Gaussian load noise.
    pub load_noise: f64,
    /// Clear-sky PV peak, kWh per hour.
    pub pv_peak: f64,
    /// Relative Gaussian PV noise.
    pub pv_noise: f64,
    /// Off-peak price, $/kWh.
    pub price_offpeak: f64,
    /// Peak price, $/kWh.
    pub price_peak: f64,
    /// First peak-price hour of day.
    pub peak_start: u32,
    /// Hour of day after the last peak-price hour.
    pub peak_end: u32,
    /// Mean carbon intensity, kgCO2e/kWh.
    pub carbon_mean: f64,
    /// Relative carbon swing, in `[0, 1]`.
    pub carbon_amplitude: f64,
    /// Battery of every building.
    pub battery: BatterySpec,
}

impl Default for SyntheticEnvConfig {
    fn default() -> Self {
        SyntheticEnvConfig {
            n_buildings: 1,
            n_days: 240,
            tail_hours: 0,
            seed: 0,
            load_mean: 2.0,
            load_amplitude: 0.5,
            load_noise: 0.15,
            pv_peak: 2.5,
            pv_noise: 0.1,
            price_offpeak: 0.22,
            price_peak: 0.54,
            peak_start: 16,
            peak_end: 21,
            carbon_mean: 0.4,
            carbon_amplitude: 0.3,
            battery: BatterySpec::default(),
        }
    }
}

impl SyntheticEnvConfig {
    /// Total generated hours: whole scoring months plus the tail.
    pub fn total_hours(&self) -> usize {
        let hours = self.n_days * 24;
        hours.div_ceil(HOURS_PER_MONTH) * HOURS_PER_MONTH + self.tail_hours
    }

    /// Hours in whole scoring months.
    pub fn scoring_hours(&self) -> usize {
        self.total_hours() - self.tail_hours
    }
}

/// Deterministic synthetic district: daily load cycle with evening peak,
/// clear-sky PV scaled by a daily cloud factor, two-level time-of-use price
/// and a smooth carbon curve with a non-daily component.
pub fn make_synthetic_env(cfg: &SyntheticEnvConfig) -> Result<EnvironmentSeries> {
    if cfg.n_buildings == 0 || cfg.n_days == 0 {
        return Err(Error::Config("n_buildings and n_days must be positive".into()));
    }
    let nonneg = [cfg.load_mean, cfg.load_amplitude, cfg.load_noise, cfg.pv_peak, cfg.pv_noise, cfg.price_offpeak, cfg.price_peak, cfg.carbon_mean];
    if nonneg.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Config("synthetic profile parameters must be finite and non-negative".into()));
    }
    if !(0.0..=1.0).contains(&cfg.carbon_amplitude) || cfg.peak_start > 24 || cfg.peak_end > 24 {
        return Err(Error::Config("carbon_amplitude must lie in [0, 1] and peak hours in 0..=24".into()));
    }
    cfg.battery.validate()?;
    let n = cfg.total_hours();
    let mut rng = Stream::new(cfg.seed, stream::ENV);
    let mut buildings = Vec::with_capacity(cfg.n_buildings);
    for _ in 0..cfg.n_buildings {
        let shift = 4.0 * rng.uniform() - 2.0;
        let scale = 0.8 + 0.4 * rng.uniform();
        let mut load = Vec::with_capacity(n);
        let mut pv = Vec::with_capacity(n);
        let mut cloud = 1.0;
        for h in 0..n {
            let hod = (h % 24) as f64;
            if h % 24 == 0 {
                cloud = 0.4 + 0.6 * rng.uniform();
            }
            let shape = 0.7 * libm::cos(2.0 * PI * (hod - 19.0 - shift) / 24.0) + 0.3 * libm::cos(4.0 * PI * (hod - 8.0 - shift) / 24.0);
            let l = cfg.load_mean * scale * (1.0 + cfg.load_amplitude * shape + cfg.load_noise * rng.normal());
            load.push(l.max(0.0));
            let sun = libm::sin(PI * (hod - 6.0) / 12.0).max(0.0);
            let p = cfg.pv_peak * sun * cloud * (1.0 + cfg.pv_noise * rng.normal());
            pv.push(if cfg.pv_peak == 0.0 { 0.0 } else { p.max(0.0) });
        }
        buildings.push(Building {
            load: TimeSeries::new(0, load)?,
            pv: TimeSeries::new(0, pv)?,
            battery: cfg.battery,
        });
    }
    let price = (0..n)
        .map(|h| {
            let hod = (h % 24) as u32;
            if (cfg.peak_start..cfg.peak_end).contains(&hod) {
                cfg.price_peak
            } else {
                cfg.price_offpeak
            }
        })
        .collect();
    let carbon = (0..n)
        .map(|h| {
            let t = h as f64;
            let wave = 0.6 * libm::sin(2.0 * PI * t / 24.0 + 1.0) + 0.4 * libm::sin(2.0 * PI * t / (24.0 * 7.3));
            cfg.carbon_mean * (1.0 + cfg.carbon_amplitude * wave)
        })
        .collect();
    EnvironmentSeries::new(buildings, TimeSeries::new(0, price)?, TimeSeries::new(0, carbon)?)
}
