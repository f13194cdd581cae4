use super::*;
use crate::asm1::{Particulates, Solubles};
use crate::constitutive::v_hs;
use crate::scenario::{self, Schedule};

fn simulator(scenario: Scenario, mode: Mode, reactions: bool) -> Simulator {
    let options = SolverOptions {
        mode,
        reactions,
        t_end: 0.1,
        ..Default::default()
    };
    Simulator::new(
        &TankConfig::default(),
        SettlingParams::default(),
        DispersionParams::new(0.004, 0.04, 0.017, 0.09),
        Asm1Params::default(),
        scenario,
        options,
    )
    .unwrap()
}

fn batch_sim() -> Simulator {
    simulator(Scenario::batch(), Mode::Batch, false)
}

/// Particulates with the given TSS [kg/m³], all in `X_I`.
fn solids(x: f64) -> Particulates {
    Particulates([x * 1000.0 / 0.75, 0.0, 0.0, 0.0, 0.0, 0.0])
}

fn total_mass(sim: &Simulator, state: &SimulationState) -> f64 {
    (0..state.cells())
        .map(|j| sim.grid.area_cells[j] * sim.grid.dz * state.c[j][0])
        .sum()
}

#[test]
fn uniform_subcritical_batch_settles_at_hindered_velocity() {
    let sim = batch_sim();
    let state = SimulationState::uniform(&sim.grid, solids(2.0), Solubles::default());
    let f = sim.face_velocities(&state).unwrap();
    let expected = v_hs(2.0, &sim.settling.params);
    for k in 2..=sim.grid.layers() {
        assert!((f.v_x[k] - expected).abs() < 1e-12);
    }
    assert_eq!(f.v_x[1], 0.0);
    assert_eq!(f.v_x[sim.grid.layers() + 1], 0.0);
    let phi = sim.flux_c(&state, &f);
    for k in 2..=sim.grid.layers() {
        let per_area = phi[k][0] / sim.grid.area_faces[k];
        assert!((per_area - expected * solids(2.0).0[0]).abs() < 1e-9);
    }
}

#[test]
fn bulk_velocity_above_and_below_feed() {
    let sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    let state = SimulationState::zeros(&sim.grid);
    let f = sim.face_velocities(&state).unwrap();
    // a face in the rectangular part above the feed
    assert!((f.q[10] - -(0.65 - 0.15) / 1.2).abs() < 1e-12);
    assert!((f.q[10] - -0.416_666_666_666_666_7).abs() < 1e-12);
    let k = sim.grid.feed_layer + 1;
    assert!(sim.grid.z_faces[k] > 0.0 && sim.grid.z_faces[k - 1] <= 0.0);
    assert!((f.q[k] * sim.grid.area_faces[k] - 0.15).abs() < 1e-12);
    assert!((sim.grid.area_faces[k] - 1.2).abs() < 0.02);
}

#[test]
fn zero_state_has_zero_flux() {
    let sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    let state = SimulationState::zeros(&sim.grid);
    let f = sim.face_velocities(&state).unwrap();
    assert!(sim.flux_c(&state, &f).iter().flatten().all(|v| *v == 0.0));
    assert!(sim.flux_s(&state, &f).iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn boundary_face_flux_is_pure_advection() {
    let sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    let mut state = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    state.c[sim.grid.layers()][2] = 1234.0;
    let f = sim.face_velocities(&state).unwrap();
    let k = sim.grid.layers() + 1;
    assert!(!sim.grid.inside_face(k));
    let phi = sim.flux_c(&state, &f);
    let expected = f.q[k] * state.c[k - 1][2] * sim.grid.area_faces[k];
    assert!(f.q[k] > 0.0);
    assert!((phi[k][2] - expected).abs() < 1e-9 * expected);
}

#[test]
fn solids_free_liquid_moves_with_bulk() {
    let sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    let mut state = SimulationState::zeros(&sim.grid);
    for s in &mut state.s {
        *s = scenario::initial_solubles().0;
    }
    let f = sim.face_velocities(&state).unwrap();
    let phi = sim.flux_s(&state, &f);
    // away from the feed inlet the mixing term vanishes and S is uniform
    for k in [5, 20, 90] {
        let upwind = if f.q[k] < 0.0 { &state.s[k] } else { &state.s[k - 1] };
        for i in 0..7 {
            let expected = sim.grid.area_faces[k] * f.q[k] * upwind[i];
            assert!((phi[k][i] - expected).abs() < 1e-12 * (1.0 + expected.abs()));
        }
    }
}

#[test]
fn uniform_solubles_are_stationary_in_a_settling_column() {
    let sim = batch_sim();
    let mut state = SimulationState::uniform(&sim.grid, solids(2.0), scenario::initial_solubles());
    state.t = 0.0;
    let (d, _, _) = sim.derivative(&state).unwrap();
    // cells whose two faces are both interior and in the rectangular part
    for j in 2..sim.grid.feed_layer - 1 {
        for v in d.ds[j] {
            assert!(v.abs() < 1e-10, "cell {j}: {v}");
        }
    }
}

#[test]
fn zero_state_without_feed_stays_zero() {
    let mut sc = scenario::scenario_m();
    sc.feed_particulates = Schedule::constant(Particulates::default());
    sc.feed_solubles = Schedule::constant(Solubles::default());
    let sim = simulator(sc, Mode::Continuous, true);
    let state = SimulationState::zeros(&sim.grid);
    let r = sim.run(&state).unwrap();
    assert!(r.final_state.c.iter().flatten().all(|v| *v == 0.0));
    assert!(r.final_state.s.iter().flatten().all(|v| *v == 0.0));
}

#[test]
fn closed_tank_conserves_mass_per_step() {
    let sim = batch_sim();
    let mut state = SimulationState::uniform(&sim.grid, solids(2.5), Solubles::default());
    state.c[0] = [0.0; 6];
    state.c[sim.grid.cells() - 1] = [0.0; 6];
    let m0 = total_mass(&sim, &state);
    for _ in 0..200 {
        let dt = sim.stable_dt(&state).unwrap();
        let next = sim.step(&state, dt).unwrap();
        let (a, b) = (total_mass(&sim, &state), total_mass(&sim, &next));
        assert!(((b - a) / a).abs() < 1e-10);
        state = next;
    }
    assert!(((total_mass(&sim, &state) - m0) / m0).abs() < 1e-10);
}

#[test]
fn stable_dt_advective_bound() {
    let mut sim = batch_sim();
    sim.dispersion = DispersionParams::default();
    let state = SimulationState::zeros(&sim.grid);
    // X = 0: interior faces carry v^X = v0, so the bound is dz / (2 v0)
    let v0 = sim.settling.params.v0;
    let expected = 0.5 * 0.0235 / (2.0 * v0);
    let dt = sim.stable_dt(&state).unwrap();
    assert!((dt - expected).abs() < 1e-12, "{dt} vs {expected}");
    assert!((dt - 9.094_427e-4).abs() < 1e-9);

    let fine = Simulator {
        grid: crate::geometry::build_grid(&TankConfig::default().with_layers(200)).unwrap(),
        ..sim.clone()
    };
    let dt_fine = fine.stable_dt(&SimulationState::zeros(&fine.grid)).unwrap();
    assert!((dt_fine / dt - 0.5).abs() < 1e-12);
}

#[test]
fn stable_dt_parabolic_bound_is_quadratic() {
    let mut sim = batch_sim();
    // strong compression makes the parabolic limit the binding one
    sim.settling = SettlingModel::new(SettlingParams {
        alpha: 3.8e8,
        ..SettlingParams::default()
    })
    .unwrap();
    let mut dts = Vec::new();
    for n in [400, 800] {
        let mut s = sim.clone();
        s.grid = crate::geometry::build_grid(&TankConfig::default().with_layers(n)).unwrap();
        let state = SimulationState::uniform(&s.grid, solids(4.0), Solubles::default());
        dts.push(s.stable_dt(&state).unwrap());
    }
    assert!((dts[1] / dts[0] - 0.25).abs() < 1e-9, "{dts:?}");
}

#[test]
fn infinite_tolerance_runs_fixed_number_of_steps() {
    let mut sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    sim.options.steady_tol = f64::INFINITY;
    sim.options.fixed_dt = Some(0.0003);
    sim.options.t_end = 0.1;
    let state = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let r = sim.run(&state).unwrap();
    assert_eq!(r.steps, (0.1f64 / 0.0003).ceil() as usize);
    assert!(!r.steady);
    assert!((r.final_state.t - 0.1).abs() < 1e-12);
}

#[test]
fn snapshots_follow_stride() {
    let mut sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    sim.options.fixed_dt = Some(0.001);
    sim.options.t_end = 0.01;
    sim.options.steady_tol = 0.0;
    sim.options.output_stride = 3;
    let state = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let r = sim.run(&state).unwrap();
    let times: Vec<f64> = r.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times.len(), 5);
    assert_eq!(times[0], 0.0);
    assert!((times[4] - 0.01).abs() < 1e-12);
}

#[test]
fn schedule_breakpoints_are_hit_exactly() {
    let mut sc = scenario::scenario_m();
    sc.feed_flow = Schedule::steps(vec![(0.0, 0.65), (0.0123, 0.8)]).unwrap();
    let mut sim = simulator(sc, Mode::Continuous, true);
    sim.options.t_end = 0.02;
    sim.options.steady_tol = 0.0;
    sim.options.output_stride = 1;
    let state = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let r = sim.run(&state).unwrap();
    assert!(r.snapshots.iter().any(|s| s.t == 0.0123));
}

#[test]
fn overfull_layer_aborts() {
    let sim = batch_sim();
    let mut state = SimulationState::zeros(&sim.grid);
    state.c[10] = solids(2000.0).0;
    assert!(matches!(sim.derivative(&state), Err(Error::Numerical { .. })));
}

#[test]
fn wrong_state_shape_rejected() {
    let sim = batch_sim();
    let state = SimulationState {
        t: 0.0,
        c: vec![[0.0; 6]; 3],
        s: vec![[0.0; 7]; 3],
    };
    assert!(sim.run(&state).is_err());
}

#[test]
fn blanket_below_feed_after_filling() {
    let mut sim = simulator(scenario::scenario_m(), Mode::Continuous, true);
    sim.options.t_end = 6.0;
    sim.options.steady_tol = 0.0;
    let state = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let r = sim.run(&state).unwrap();
    let z = sim.sludge_blanket(&r.final_state, 1.0).unwrap();
    assert!(z > 0.0 && z < sim.grid.config.depth_below_feed, "{z}");
}

#[test]
fn profile_interpolation() {
    let sim = batch_sim();
    let profile: Vec<f64> = sim.grid.z_centers.iter().map(|z| 2.0 * z + 1.0).collect();
    for z in [-1.0, 0.0, 0.3337, 1.0] {
        assert!((sim.sample_profile(&profile, z) - (2.0 * z + 1.0)).abs() < 1e-12);
    }
    assert_eq!(sim.sample_profile(&profile, -5.0), profile[1]);
}
