//! Bounded Nelder-Mead minimization of the Rosenbrock function.

use reactive_settling::calibration::{nelder_mead, ObjectiveSpec};

fn main() -> reactive_settling::Result<()> {
    let rosenbrock = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
    let spec = ObjectiveSpec::new(vec![-1.2, 1.0]).with_names(&["x", "y"]).with_max_iterations(200);
    let r = nelder_mead(rosenbrock, &spec)?;
    println!("minimum {:.3e} at ({:.6}, {:.6}) after {} iterations", r.f, r.x[0], r.x[1], r.iterations);

    let bounded = spec.with_bounds(vec![(-2.0, 0.5), (-1.0, 2.0)]);
    let r = nelder_mead(rosenbrock, &bounded)?;
    println!("with x <= 0.5: {:.4e} at ({:.6}, {:.6})", r.f, r.x[0], r.x[1]);
    Ok(())
}
