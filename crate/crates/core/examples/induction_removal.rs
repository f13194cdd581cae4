//! Remove the initial induction period from a batch settling curve so the
//! blanket descends linearly in the rescaled time.

use reactive_settling::induction::{remove_induction, BatchCurve, InductionFit};

fn main() -> reactive_settling::Result<()> {
    let truth = InductionFit {
        v_settle: 3.2134,
        t_bar: 0.018,
        p_exp: 1.64,
        t_induction_end: 0.05,
    };
    // accelerating start, then a slowdown once the blanket nears the bottom
    let times: Vec<f64> = (0..=60).map(|i| i as f64 * 0.0025).collect();
    let h_end = truth.predict(1.0, &[0.05])[0];
    let sbl = times
        .iter()
        .map(|&t| {
            if t <= 0.05 {
                truth.predict(1.0, &[t])[0]
            } else {
                h_end - truth.v_settle * 0.1 * (1.0 - (-(t - 0.05) / 0.1).exp())
            }
        })
        .collect();
    let curve = BatchCurve::new(times, sbl, 1.5)?;
    let (fit, tau) = remove_induction(&curve)?;
    println!(
        "fitted v = {:.4} m/h, t_bar = {:.5} h, p = {:.3}, induction ends at {:.4} h, G = {:.4} there",
        fit.v_settle,
        fit.t_bar,
        fit.p_exp,
        fit.t_induction_end,
        fit.g(fit.t_induction_end)
    );
    println!("  t [h]   tau [h]   SBL [m]");
    for i in (0..=20).step_by(2) {
        println!("{:7.4} {:9.5} {:9.4}", curve.times[i], tau.times[i], tau.sbl[i]);
    }
    Ok(())
}
