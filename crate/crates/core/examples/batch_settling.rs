//! Batch sedimentation in a 1 m column for several initial concentrations.

use reactive_settling::constitutive::{v_hs, SettlingModel, SettlingParams};
use reactive_settling::solver::{batch_simulate, BatchOptions};

fn main() -> reactive_settling::Result<()> {
    let model = SettlingModel::new(SettlingParams::default())?;
    let opts = BatchOptions::default();
    let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.05).collect();
    print!("t [h]  ");
    for t in &times {
        print!("{t:6.2}");
    }
    println!();
    for x in [1.1, 1.5, 2.0, 2.5, 3.2] {
        let r = batch_simulate(x, &times, &model, &opts)?;
        print!("X={x:.1} ");
        for h in &r.sbl {
            print!("{h:6.3}");
        }
        let drift = (r.mass.last().unwrap() - r.mass[0]) / r.mass[0];
        println!("   v_hs = {:.3} m/h, mass drift {drift:.1e}", v_hs(x, &model.params));
    }
    Ok(())
}
