use commitlab_core::battery::{execute, make_synthetic_env, ramping, Action, BatterySpec, Building, EnvironmentSeries, Plan, SyntheticEnvConfig};
use commitlab_core::bounds::{bound_expdecay, bound_iid, fv_norm_expdecay, BoundParams};
use commitlab_core::forecast::{generate_point_archive_from, NoiseModel};
use commitlab_core::metrics::{emd_1d, mac_h, mae, pearson};
use commitlab_core::policy::{run_fhc, Period, PolicyConfig};
use commitlab_core::series::{ForecastWindow, TimeSeries};
use proptest::prelude::*;

fn values(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0_f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mae_of_constant_offset_is_the_offset(truth in values(1..30), delta in -5.0..5.0_f64) {
        let y = TimeSeries::new(1, truth.clone()).unwrap();
        let w = ForecastWindow::point(0, truth.iter().map(|v| v + delta).collect()).unwrap();
        prop_assert!((mae(&w, &y).unwrap() - delta.abs()).abs() < 1e-9);
    }

    #[test]
    fn emd_is_symmetric_and_shift_equivariant(p in values(1..20), shift in -3.0..3.0_f64, seed in 0u64..1000) {
        let mut q: Vec<f64> = p.iter().enumerate().map(|(i, v)| v * 0.5 + (i as u64 ^ seed) as f64 % 7.0).collect();
        q.reverse();
        prop_assert!((emd_1d(&p, &q).unwrap() - emd_1d(&q, &p).unwrap()).abs() < 1e-12);
        let moved: Vec<f64> = p.iter().map(|v| v + shift).collect();
        prop_assert!((emd_1d(&p, &moved).unwrap() - shift.abs()).abs() < 1e-9);
    }

    #[test]
    fn ramp_has_constant_horizontal_change(start in -5.0..5.0_f64, slope in -3.0..3.0_f64, h in 2usize..30) {
        let w = ForecastWindow::point(0, (0..h).map(|i| start + slope * i as f64).collect()).unwrap();
        prop_assert!((mac_h(&w).unwrap() - slope.abs()).abs() < 1e-9);
    }

    #[test]
    fn ramping_ignores_constant_shifts(e in values(2..40), shift in -10.0..10.0_f64) {
        let moved: Vec<f64> = e.iter().map(|v| v + shift).collect();
        prop_assert!((ramping(&e) - ramping(&moved)).abs() < 1e-9);
    }

    #[test]
    fn pearson_is_bounded_and_affine_invariant(xs in values(3..20), scale in 0.1..4.0_f64, offset in -5.0..5.0_f64) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, v)| v.sin() + i as f64 * 0.1).collect();
        if let Ok(r) = pearson(&xs, &ys) {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&r));
            let zs: Vec<f64> = xs.iter().map(|v| scale * v + offset).collect();
            prop_assert!((pearson(&zs, &ys).unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn lossless_battery_conserves_energy(
        load in prop::collection::vec(0.0..5.0_f64, 2..40),
        moves in prop::collection::vec(-3.0..3.0_f64, 40),
    ) {
        let n = load.len();
        let battery = BatterySpec { capacity: 8.0, soc_min: 0.0, soc_max: 8.0, p_max: 2.0, eta_charge: 1.0, eta_discharge: 1.0, initial_soc: 4.0 };
        let env = EnvironmentSeries::new(
            vec![Building { load: TimeSeries::new(0, load.clone()).unwrap(), pv: TimeSeries::new(0, vec![0.0; n]).unwrap(), battery }],
            TimeSeries::new(0, vec![1.0; n]).unwrap(),
            TimeSeries::new(0, vec![1.0; n]).unwrap(),
        )
        .unwrap();
        let plan = Plan { start: 0, actions: vec![moves[..n].iter().map(|&x| Action::from_net(x)).collect()] };
        let tr = execute(&env, &plan, &[4.0]).unwrap();
        let stored = tr.soc[0][n] - tr.soc[0][0];
        let drawn: f64 = (0..n).map(|k| tr.net_load[k] - load[k]).sum();
        prop_assert!((stored - drawn).abs() < 1e-9);
        prop_assert!(tr.soc[0].iter().all(|s| (0.0..=8.0).contains(s)));
    }

    #[test]
    fn iid_bound_gap_is_the_switching_term(v in 1usize..30, w in 1usize..30, beta in 0.0..3.0_f64, sigma in 0.0..2.0_f64) {
        let p = BoundParams { beta, sigma, opt_cost: 2.0, ..BoundParams::default() };
        let gap = bound_iid(&p, v).unwrap() - bound_iid(&p, w).unwrap();
        let expect = 2.0 * p.t * beta * p.diam * (1.0 / v as f64 - 1.0 / w as f64);
        prop_assert!((gap - expect).abs() < 1e-9);
        prop_assert!(bound_iid(&p, v).unwrap() >= p.opt_cost);
        prop_assert!(bound_expdecay(&p, v).unwrap() >= p.opt_cost);
    }

    #[test]
    fn fv_norm_grows_with_every_argument(v in 1usize..40, a in 0.0..0.95_f64, c in 0.1..3.0_f64, sigma in 0.0..3.0_f64) {
        let p = BoundParams { a, c, sigma, ..BoundParams::default() };
        let base = fv_norm_expdecay(&p, v).unwrap();
        prop_assert!(fv_norm_expdecay(&p, v + 1).unwrap() >= base);
        let bigger = [BoundParams { a: a + 0.04, ..p }, BoundParams { c: c * 1.5, ..p }, BoundParams { sigma: sigma + 0.1, ..p }];
        for q in &bigger {
            prop_assert!(fv_norm_expdecay(q, v).unwrap() >= base);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn controller_plans_never_need_clipping(seed in 0u64..500, v_f in 1usize..8, v_o_frac in 0.0..1.0_f64, beta in 0.0..1.0_f64) {
        let env = make_synthetic_env(&SyntheticEnvConfig { n_days: 6, n_buildings: 2, tail_hours: 12, seed, ..Default::default() }).unwrap();
        let v_o = 1 + ((v_f - 1) as f64 * v_o_frac) as usize;
        let period = Period { start: 0, hours: 120 };
        let archives: Vec<_> = (0..2)
            .map(|b| {
                let noise = NoiseModel::exp_decay(0.3, 0.8, 1.0, seed + b);
                generate_point_archive_from(&env.net_base(b as usize), 12, v_f, 0, (period.hours - 2) / v_f + 1, &noise).unwrap()
            })
            .collect();
        let run = run_fhc(&env, &archives, &PolicyConfig { beta, ..PolicyConfig::fhc(v_f, v_o, 12, period) }).unwrap();
        prop_assert_eq!(run.trace.clips, 0);
        prop_assert_eq!(run.trace.len(), 120);
    }
}
