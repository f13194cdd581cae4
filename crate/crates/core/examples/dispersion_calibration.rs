//! Fit the two dispersion coefficients (mixing switched off) to a steady
//! profile generated by the model itself on a coarse grid.

use reactive_settling::calibration::{fit_dispersion, sample_state, DispersionFitOptions, DispersionMode};
use reactive_settling::scenario;
use reactive_settling::{Asm1Params, DispersionParams, SettlingParams, SimulationState, Simulator, SolverOptions, TankConfig};

fn main() -> reactive_settling::Result<()> {
    let truth = DispersionParams::new(0.06, 0.05, 0.0, 0.0);
    let sim = Simulator::new(
        &TankConfig::default().with_layers(30),
        SettlingParams::default(),
        truth,
        Asm1Params::default(),
        scenario::scenario_m(),
        SolverOptions {
            t_end: 100.0,
            ..Default::default()
        },
    )?;
    let start = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let reference = sim.run(&start)?.final_state;
    let data: Vec<_> = [-0.6, -0.1, 0.1, 0.4, 0.7, 1.0]
        .iter()
        .map(|&z| sample_state(&sim, &reference, z))
        .collect();

    let opts = DispersionFitOptions {
        mode: DispersionMode::Reduced,
        max_iterations: 80,
        ..Default::default()
    };
    let fit = fit_dispersion(&sim, &data, &start, &opts)?;
    println!("truth  d_x = {:.5}, d_l = {:.5}", truth.d_x, truth.d_l);
    println!("fitted d_x = {:.5}, d_l = {:.5}", fit.params.d_x, fit.params.d_l);
    println!("error {:.3e} after {} model runs", fit.value, fit.evaluations.len());
    Ok(())
}
