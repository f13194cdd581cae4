//! Fill the tank from uniform initial contents and run scenario M to steady
//! state. Pass `L`, `M` or `H` as the first argument to pick a scenario.

use reactive_settling::asm1::Solubles;
use reactive_settling::scenario;
use reactive_settling::{Asm1Params, DispersionParams, SettlingParams, SimulationState, Simulator, SolverOptions, TankConfig};

fn main() -> reactive_settling::Result<()> {
    let label = std::env::args().nth(1).unwrap_or_else(|| "M".into());
    let scenario = scenario::bundled(&label).expect("scenario L, M or H");
    let options = SolverOptions {
        t_end: 100.0,
        output_stride: 20_000,
        ..Default::default()
    };
    let sim = Simulator::new(
        &TankConfig::default(),
        SettlingParams::default(),
        DispersionParams::fitted(),
        Asm1Params::default(),
        scenario,
        options,
    )?;
    let start = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
    let run = sim.run(&start)?;
    for snap in &run.snapshots {
        println!("t = {:6.2} h  blanket at z = {:+.3} m", snap.t, sim.sludge_blanket(snap, 1.0)?);
    }
    println!("steady: {} after {} steps (residual {:.2e})", run.steady, run.steps, run.residual);

    let state = &run.final_state;
    let tss = state.tss_profile();
    println!("\n   z [m]   TSS [g/m³]   S_O    S_NO   S_NH");
    for j in (0..state.cells()).step_by(5) {
        let s = &state.s[j];
        println!(
            "{:+8.3} {:11.2} {:6.3} {:6.3} {:6.3}",
            sim.grid.z_centers[j],
            tss[j],
            s[Solubles::S_O],
            s[Solubles::S_NO],
            s[Solubles::S_NH]
        );
    }
    Ok(())
}
