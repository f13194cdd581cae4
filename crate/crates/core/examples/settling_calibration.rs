//! Recover known settling parameters from synthetic batch curves.

use reactive_settling::calibration::fit_settling;
use reactive_settling::constitutive::{SettlingModel, SettlingParams};
use reactive_settling::induction::BatchCurve;
use reactive_settling::solver::{batch_simulate, BatchOptions};

fn main() -> reactive_settling::Result<()> {
    let truth = SettlingParams::default().with_fitted(6.0, 2.0, 2.5, 3e5);
    let opts = BatchOptions {
        layers: 50,
        ..Default::default()
    };
    let model = SettlingModel::new(truth)?;
    let times: Vec<f64> = (0..=15).map(|i| i as f64 / 30.0).collect();
    let curves = [1.2, 2.0, 2.8, 3.2]
        .iter()
        .map(|&x| BatchCurve::new(times.clone(), batch_simulate(x, &times, &model, &opts)?.sbl, x))
        .collect::<reactive_settling::Result<Vec<_>>>()?;

    let fit = fit_settling(&curves, &SettlingParams::default(), &opts, 2000)?;
    let p = fit.params;
    println!("            truth      fitted");
    println!("v0    {:10.4} {:11.4}", truth.v0, p.v0);
    println!("xbar  {:10.4} {:11.4}", truth.xbar, p.xbar);
    println!("eta   {:10.4} {:11.4}", truth.eta, p.eta);
    println!("alpha {:10.1} {:11.1}", truth.alpha, p.alpha);
    println!("SSE {:.3e} after {} iterations", fit.sse, fit.optimizer.iterations);
    Ok(())
}
