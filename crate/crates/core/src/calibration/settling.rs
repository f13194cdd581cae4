//! Calibration of the hindered settling and compression parameters against
//! batch settling curves with the induction period removed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constitutive::{SettlingModel, SettlingParams};
use crate::error::{Error, Result};
use crate::induction::BatchCurve;
use crate::solver::{batch_simulate, BatchOptions};

use super::{nelder_mead, NelderMeadResult, ObjectiveSpec};

pub const SETTLING_NAMES: [&str; 4] = ["v0", "xbar", "eta", "alpha"];

/// Sum of squared blanket-level residuals over all curves for the given
/// parameters. Each column is as high as the first sample of its curve.
/// A failed simulation yields `+inf`.
pub fn sse_batch(params: &SettlingParams, curves: &[BatchCurve], opts: &BatchOptions) -> f64 {
    if curves.is_empty() {
        return 0.0;
    }
    let Ok(model) = SettlingModel::new(*params) else {
        return f64::INFINITY;
    };
    curves
        .par_iter()
        .map(|curve| curve_sse(&model, curve, opts).unwrap_or(f64::INFINITY))
        .sum()
}

fn curve_sse(model: &SettlingModel, curve: &BatchCurve, opts: &BatchOptions) -> Result<f64> {
    let opts = BatchOptions {
        column_height: curve.sbl[0],
        ..*opts
    };
    let sim = batch_simulate(curve.x_init, &curve.times, model, &opts)?;
    Ok(sim.sbl.iter().zip(&curve.sbl).map(|(a, b)| (a - b).powi(2)).sum())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SettlingFit {
    pub params: SettlingParams,
    pub sse: f64,
    pub optimizer: NelderMeadResult,
}

/// Fit `(v0, X̄, η, α)` starting from `start`; the remaining fields of
/// `start` (critical concentration, densities) stay fixed. The simplex
/// works on the logarithms of the four parameters.
pub fn fit_settling(
    curves: &[BatchCurve],
    start: &SettlingParams,
    opts: &BatchOptions,
    max_iterations: usize,
) -> Result<SettlingFit> {
    if curves.is_empty() {
        return Err(Error::invalid("calibration", "no batch curves given"));
    }
    for c in curves {
        c.validate()?;
    }
    start.validate()?;
    let to_params = |theta: &[f64]| start.with_fitted(theta[0].exp(), theta[1].exp(), theta[2].exp(), theta[3].exp());
    let objective = |theta: &[f64]| sse_batch(&to_params(theta), curves, opts);
    let x0 = vec![start.v0.ln(), start.xbar.ln(), start.eta.ln(), start.alpha.ln()];
    let spec = ObjectiveSpec::new(x0)
        .with_names(&["ln_v0", "ln_xbar", "ln_eta", "ln_alpha"])
        .with_scale(vec![0.1, 0.1, 0.1, 0.3])
        // keeps eta above 1
        .with_bounds(vec![
            (f64::NEG_INFINITY, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
            (1e-3, f64::INFINITY),
            (f64::NEG_INFINITY, f64::INFINITY),
        ])
        .with_tolerances(1e-6, 1e-14)
        .with_max_iterations(max_iterations)
        .with_restarts(1);
    let r = nelder_mead(objective, &spec)?;
    Ok(SettlingFit {
        params: to_params(&r.x),
        sse: r.f,
        optimizer: r,
    })
}
