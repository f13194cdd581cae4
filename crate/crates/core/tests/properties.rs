//! Randomized invariants across the public API.

use proptest::prelude::*;

use reactive_settling::asm1::{reactions, Asm1Params, Particulates, Solubles};
use reactive_settling::calibration::{nelder_mead, profile_error, sample_state, sse_batch, ObjectiveSpec};
use reactive_settling::constitutive::{d_mix, v_hs, DispersionParams, SettlingModel, SettlingParams};
use reactive_settling::geometry::{area, TankConfig};
use reactive_settling::induction::{rescale_time, BatchCurve, InductionFit};
use reactive_settling::scenario;
use reactive_settling::solver::{batch_simulate, BatchOptions, SimulationState, Simulator, SolverOptions};

fn particulates() -> impl Strategy<Value = [f64; 6]> {
    prop::array::uniform6(0.0f64..3000.0)
}

fn solubles() -> impl Strategy<Value = [f64; 7]> {
    (prop::array::uniform6(0.0f64..40.0), 0.0f64..60.0).prop_map(|(s, alk)| [s[0], s[1], s[2], s[3], s[4], s[5], alk])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inert_rows_vanish(c in particulates(), s in solubles()) {
        let (rc, rs) = reactions(&Particulates(c), &Solubles(s), &Asm1Params::default());
        prop_assert_eq!(rc.0[Particulates::X_I], 0.0);
        prop_assert_eq!(rs.0[Solubles::S_I], 0.0);
    }

    #[test]
    fn absent_components_are_not_consumed(c in particulates(), s in solubles(), which in 0usize..7) {
        let (mut c, mut s) = (c, s);
        // S_NH, S_S, S_NO, X_S, X_ND, X_BH, X_BA
        let slot: (bool, usize) = [
            (false, Solubles::S_NH),
            (false, Solubles::S_S),
            (false, Solubles::S_NO),
            (true, Particulates::X_S),
            (true, Particulates::X_ND),
            (true, Particulates::X_BH),
            (true, Particulates::X_BA),
        ][which];
        if slot.0 { c[slot.1] = 0.0 } else { s[slot.1] = 0.0 }
        let (rc, rs) = reactions(&Particulates(c), &Solubles(s), &Asm1Params::default());
        let r = if slot.0 { rc.0[slot.1] } else { rs.0[slot.1] };
        prop_assert!(r >= 0.0, "component {:?} rate {}", slot, r);
    }

    #[test]
    fn area_is_continuous_everywhere(z in -1.25f64..1.1) {
        let cfg = TankConfig::default();
        let eps = 1e-9;
        let lo = area((z - eps).max(-1.25), &cfg).unwrap();
        let hi = area((z + eps).min(1.1), &cfg).unwrap();
        prop_assert!((lo - hi).abs() < 1e-6);
    }

    #[test]
    fn hindered_velocity_decreases(x1 in 0.0f64..20.0, dx in 1e-6f64..20.0) {
        let p = SettlingParams::default();
        prop_assert!(v_hs(x1, &p) > v_hs(x1 + dx, &p));
    }

    #[test]
    fn mixing_is_nonnegative_compact_and_peaked(
        a1 in 0.0f64..0.1,
        a2 in 0.01f64..1.0,
        q_u in 0.05f64..1.0,
        q_e in 0.05f64..1.0,
        z in -1.25f64..1.1,
    ) {
        let dp = DispersionParams::new(0.0, 0.0, a1, a2);
        let m = d_mix(z, q_u, q_e, &dp);
        prop_assert!(m >= 0.0);
        prop_assert!(m <= d_mix(0.0, q_u, q_e, &dp));
        let width = if z < 0.0 { a2 * q_e } else { a2 * q_u };
        if z.abs() >= width {
            prop_assert_eq!(m, 0.0);
        }
        // continuity
        prop_assert!((d_mix(z + 1e-10, q_u, q_e, &dp) - m).abs() < 1e-6 * a1.max(1e-12) + 1e-12);
    }

    #[test]
    fn rescaled_time_keeps_order_and_lags(t_bar in 1e-3f64..0.2, p in 0.5f64..4.0) {
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 0.025).collect();
        let sbl: Vec<f64> = (0..=20).map(|i| 1.0 - i as f64 * 0.02).collect();
        let curve = BatchCurve::new(times.clone(), sbl, 2.0).unwrap();
        let fit = InductionFit { v_settle: 1.0, t_bar, p_exp: p, t_induction_end: 0.05 };
        let tau = rescale_time(&curve, &fit);
        prop_assert_eq!(tau.len(), curve.len());
        for i in 1..tau.len() {
            prop_assert!(tau.times[i] > tau.times[i - 1]);
            prop_assert!(tau.times[i] < times[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn nelder_mead_trace_never_increases(
        center in prop::collection::vec(-5.0f64..5.0, 3),
        weights in prop::collection::vec(0.1f64..100.0, 3),
        start in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let f = |x: &[f64]| x.iter().zip(&center).zip(&weights).map(|((a, c), w)| w * (a - c).powi(2)).sum::<f64>();
        let r = nelder_mead(f, &ObjectiveSpec::new(start).with_max_iterations(300)).unwrap();
        for w in r.trace.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert_eq!(r.f, f(&r.x));
    }

    #[test]
    fn batch_mass_is_conserved(x_init in 0.2f64..3.5) {
        let model = SettlingModel::new(SettlingParams::default()).unwrap();
        let opts = BatchOptions { layers: 40, ..Default::default() };
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.02).collect();
        let r = batch_simulate(x_init, &times, &model, &opts).unwrap();
        let m0 = r.mass[0];
        for m in &r.mass {
            prop_assert!(((m - m0) / m0).abs() < 1e-10);
        }
    }

    #[test]
    fn sse_is_nonnegative(v0 in 2.0f64..10.0, xbar in 1.0f64..3.0, eta in 1.5f64..4.0) {
        let truth = SettlingModel::new(SettlingParams::default()).unwrap();
        let opts = BatchOptions { layers: 30, ..Default::default() };
        let times: Vec<f64> = (0..=6).map(|i| i as f64 * 0.05).collect();
        let curves: Vec<BatchCurve> = [1.5, 2.5]
            .iter()
            .map(|&x| BatchCurve::new(times.clone(), batch_simulate(x, &times, &truth, &opts).unwrap().sbl, x).unwrap())
            .collect();
        prop_assert_eq!(sse_batch(&SettlingParams::default(), &curves, &opts), 0.0);
        let p = SettlingParams { v0, xbar, eta, ..SettlingParams::default() };
        prop_assert!(sse_batch(&p, &curves, &opts) >= 0.0);
    }

    #[test]
    fn one_step_keeps_concentrations_nonnegative(
        cells in prop::collection::vec((particulates(), solubles()), 22),
        label in prop::sample::select(vec!["L", "M", "H"]),
    ) {
        let sim = Simulator::new(
            &TankConfig::default().with_layers(20),
            SettlingParams::default(),
            DispersionParams::fitted(),
            Asm1Params::default(),
            scenario::bundled(label).unwrap(),
            SolverOptions::default(),
        )
        .unwrap();
        // keep every layer well below the maximum packing
        let state = SimulationState {
            t: 0.0,
            c: cells.iter().map(|(c, _)| c.map(|v| v * 0.5)).collect(),
            s: cells.iter().map(|(_, s)| *s).collect(),
        };
        let dt = sim.admissible_dt(&state).unwrap();
        prop_assert!(dt <= sim.stable_dt(&state).unwrap());
        let next = sim.step(&state, dt).unwrap();
        for (c, s) in next.c.iter().zip(&next.s) {
            prop_assert!(c.iter().all(|v| *v >= -1e-9));
            prop_assert!(s[..6].iter().all(|v| *v >= -1e-9));
        }
    }
}

#[test]
fn profile_error_ignores_data_order() {
    let sim = Simulator::new(
        &TankConfig::default().with_layers(20),
        SettlingParams::default(),
        DispersionParams::fitted(),
        Asm1Params::default(),
        scenario::scenario_m(),
        SolverOptions { t_end: 1.0, ..Default::default() },
    )
    .unwrap();
    let s0 = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let state = sim.run(&s0).unwrap().final_state;
    let data: Vec<_> = [-0.6, 0.2, 0.6, 1.0]
        .iter()
        .map(|&z| {
            let mut d = sample_state(&sim, &state, z);
            d.tss *= 1.1;
            d.s_no += 0.3;
            d
        })
        .collect();
    let e = profile_error(&sim, &state, &data);
    assert!(e > 0.0);
    let mut perms = vec![data.clone()];
    let mut rev = data.clone();
    rev.reverse();
    perms.push(rev);
    let mut rot = data.clone();
    rot.rotate_left(1);
    perms.push(rot);
    for p in perms {
        assert!((profile_error(&sim, &state, &p) - e).abs() <= 1e-14 * e);
    }
}
