//! Steady states of the three pilot-plant scenarios and their total
//! nitrogen profiles.

use reactive_settling::asm1::{Particulates, Solubles};
use reactive_settling::io::commands::total_nitrogen;
use reactive_settling::scenario;
use reactive_settling::{Asm1Params, DispersionParams, SettlingParams, SimulationState, Simulator, SolverOptions, TankConfig};

fn main() -> reactive_settling::Result<()> {
    for sc in [scenario::scenario_l(), scenario::scenario_m(), scenario::scenario_h()] {
        let label = sc.label.clone();
        let sim = Simulator::new(
            &TankConfig::default().with_layers(50),
            SettlingParams::default(),
            DispersionParams::fitted(),
            Asm1Params::default(),
            sc,
            SolverOptions {
                t_end: 100.0,
                ..Default::default()
            },
        )?;
        let start = SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles());
        let run = sim.run(&start)?;
        let state = &run.final_state;
        let tss = state.tss_profile();
        println!(
            "scenario {label}: steady {} at t = {:.1} h, effluent TSS {:.2e}, underflow TSS {:.0} g/m³, blanket at z = {:+.3} m",
            run.steady,
            state.t,
            tss[0],
            tss[tss.len() - 1],
            sim.sludge_blanket(state, 1.0)?
        );
        for j in (1..state.cells() - 1).step_by(7) {
            println!(
                "  z = {:+.3}  total N {:7.3}  (X_ND {:6.3}, S_NO {:6.3}, S_NH {:6.3}, S_ND {:6.3})",
                sim.grid.z_centers[j],
                total_nitrogen(&state.c[j], &state.s[j]),
                state.c[j][Particulates::X_ND],
                state.s[j][Solubles::S_NO],
                state.s[j][Solubles::S_NH],
                state.s[j][Solubles::S_ND]
            );
        }
    }
    Ok(())
}
