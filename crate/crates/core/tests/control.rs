use commitlab_core::battery::{make_synthetic_env, EnvironmentSeries, SyntheticEnvConfig};
use commitlab_core::forecast::{generate_point_archive_from, NoiseModel};
use commitlab_core::lp::{solve, LinearProgram, LpStatus, SolverOptions};
use commitlab_core::policy::{run_afhc, run_decision_grid, run_fhc, GridConfig, Period, PolicyConfig};
use commitlab_core::series::{ForecastArchive, TimeSeries};

/// Full-period optimum with explicit SOC and net-load variables. Hour
/// `start` carries no action; its cost is added as a constant.
fn offline_optimum(env: &EnvironmentSeries, period: Period, beta: f64, w_co2: f64) -> f64 {
    let bat = env.buildings[0].battery;
    let base = env.net_base(0);
    let kappa = |t: i64| env.price.at(t).unwrap() + w_co2 * env.carbon.at(t).unwrap();
    let e0 = base.at(period.start).unwrap();
    let mut lp = LinearProgram::new();
    let mut prev_soc = None;
    let mut prev_e = None;
    for t in period.start + 1..period.end() {
        let xp = lp.add_var(0.0, 0.0, bat.p_max);
        let xn = lp.add_var(0.0, -bat.p_max, 0.0);
        let soc = lp.add_var(0.0, bat.soc_min, bat.soc_max);
        let e = lp.add_var(0.0, f64::NEG_INFINITY, f64::INFINITY);
        let u = lp.add_var(1.0, 0.0, f64::INFINITY);
        let mut dyn_row = vec![(soc, 1.0), (xp, -bat.eta_charge), (xn, -1.0 / bat.eta_discharge)];
        let rhs = match prev_soc {
            Some(p) => {
                dyn_row.push((p, -1.0));
                0.0
            }
            None => bat.initial_soc,
        };
        lp.add_row(dyn_row, rhs, rhs);
        let b = base.at(t).unwrap();
        lp.add_row(vec![(e, 1.0), (xp, -1.0), (xn, -1.0)], b, b);
        lp.add_row(vec![(u, 1.0), (e, -kappa(t))], 0.0, f64::INFINITY);
        if beta > 0.0 {
            let s = lp.add_var(beta, 0.0, f64::INFINITY);
            match prev_e {
                Some(pe) => {
                    lp.add_row(vec![(s, 1.0), (e, -1.0), (pe, 1.0)], 0.0, f64::INFINITY);
                    lp.add_row(vec![(s, 1.0), (e, 1.0), (pe, -1.0)], 0.0, f64::INFINITY);
                }
                None => {
                    lp.add_row(vec![(s, 1.0), (e, -1.0)], -e0, f64::INFINITY);
                    lp.add_row(vec![(s, 1.0), (e, 1.0)], e0, f64::INFINITY);
                }
            }
        }
        prev_soc = Some(soc);
        prev_e = Some(e);
    }
    let res = solve(&lp, &SolverOptions::default());
    assert_eq!(res.status, LpStatus::Optimal);
    res.objective + (e0 * kappa(period.start)).max(0.0)
}

fn env(seed: u64, tail: usize) -> EnvironmentSeries {
    make_synthetic_env(&SyntheticEnvConfig { n_days: 4, tail_hours: tail, seed, ..Default::default() }).unwrap()
}

fn archive(truth: &TimeSeries, h: usize, v_f: usize, period: Period, noise: &NoiseModel) -> Vec<ForecastArchive> {
    let count = (period.hours - 2) / v_f + 1;
    vec![generate_point_archive_from(truth, h, v_f, period.start, count, noise).unwrap()]
}

#[test]
fn full_commitment_with_perfect_forecast_is_offline_optimal() {
    let period = Period { start: 0, hours: 48 };
    for (seed, beta) in [(1, 0.0), (2, 0.0), (3, 0.4), (4, 1.5)] {
        let env = env(seed, 48);
        let a = archive(&env.net_base(0), 48, 48, period, &NoiseModel::iid(0.0, 0));
        let cfg = PolicyConfig { beta, ..PolicyConfig::fhc(48, 48, 48, period) };
        let run = run_fhc(&env, &a, &cfg).unwrap();
        assert_eq!(run.solve_hours, vec![0]);
        let realized = run.trace.realized_cost(beta, 1.0);
        let oracle = offline_optimum(&env, period, beta, 1.0);
        assert!((realized - oracle).abs() <= 1e-6 * oracle.abs().max(1.0), "seed {seed}: {realized} vs {oracle}");
    }
}

#[test]
fn perfect_forecasts_make_replanning_a_no_op() {
    let period = Period { start: 0, hours: 48 };
    let env = env(5, 48);
    let grid = GridConfig {
        v_max: 12,
        horizon: 48,
        beta: 0.5,
        w_co2: 1.0,
        tol: 1e-9,
        period,
        include_grid: false,
        es_p: 1.0,
        scenarios: None,
    };
    let cells = run_decision_grid(&env, &[env.net_base(0)], &NoiseModel::exp_decay(0.0, 0.8, 1.0, 1), &grid).unwrap();
    assert_eq!(cells.len(), 78);
    let first = cells[0];
    for c in &cells {
        assert!((c.plain.kpis.avg_score - first.plain.kpis.avg_score).abs() < 1e-6, "{} {}", c.v_f, c.v_o);
        let (a, b) = (c.switching.unwrap().realized_cost, first.switching.unwrap().realized_cost);
        assert!((a - b).abs() < 1e-6 * b.max(1.0));
    }
}

#[test]
fn afhc_never_costs_more_than_its_phases_on_average() {
    let period = Period { start: 0, hours: 72 };
    for seed in 0..10 {
        let env = env(seed, 12);
        let truth = env.net_base(0);
        for v in [2, 3, 5] {
            let a = archive(&truth, 12, v, period, &NoiseModel::exp_decay(0.3, 0.8, 1.0, seed));
            let cfg = PolicyConfig { beta: 0.3, ..PolicyConfig::afhc(v, 12, period) };
            let run = run_afhc(&env, &a, &cfg).unwrap();
            assert_eq!(run.phases.len(), v);
            assert_eq!(run.trace.clips, 0);
            let own = run.trace.realized_cost(0.3, 1.0);
            let mean = run.phases.iter().map(|p| p.trace.realized_cost(0.3, 1.0)).sum::<f64>() / v as f64;
            assert!(own <= mean + 1e-9, "seed {seed} v {v}: {own} > {mean}");
        }
    }
}

#[test]
fn plans_only_see_the_past() {
    let period = Period { start: 0, hours: 60 };
    let env_a = env(9, 12);
    let mut env_b = env_a.clone();
    let mut load: Vec<f64> = env_b.buildings[0].load.values().to_vec();
    for v in load.iter_mut().skip(31) {
        *v += 1.7;
    }
    env_b.buildings[0].load = TimeSeries::new(0, load).unwrap();
    let a = archive(&env_a.net_base(0), 12, 4, period, &NoiseModel::iid(0.2, 3));
    let cfg = PolicyConfig { beta: 0.2, ..PolicyConfig::fhc(4, 2, 12, period) };
    let ra = run_fhc(&env_a, &a, &cfg).unwrap().trace;
    let rb = run_fhc(&env_b, &a, &cfg).unwrap().trace;
    assert_eq!(ra.actions[0][..32], rb.actions[0][..32]);
    assert_ne!(ra.net_load, rb.net_load);
}

#[test]
fn runs_are_deterministic() {
    let period = Period { start: 0, hours: 40 };
    let env = env(2, 8);
    let grid = GridConfig {
        v_max: 4,
        horizon: 8,
        beta: 0.2,
        w_co2: 1.0,
        tol: 1e-9,
        period,
        include_grid: false,
        es_p: 1.0,
        scenarios: None,
    };
    let noise = NoiseModel::exp_decay(0.4, 0.8, 1.0, 17);
    let a = run_decision_grid(&env, &[env.net_base(0)], &noise, &grid).unwrap();
    let b = run_decision_grid(&env, &[env.net_base(0)], &noise, &grid).unwrap();
    assert_eq!(a, b);
}
