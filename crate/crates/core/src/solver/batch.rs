//! Batch settling in a closed column of constant cross-section.
//!
//! Only the solids concentration is transported: hindered settling plus
//! compression, no bulk flow, no dispersion and zero flux through the top
//! and the bottom of the column.

use serde::{Deserialize, Serialize};

use crate::constitutive::SettlingModel;
use crate::error::{Error, Result};

use super::{SimulationState, Simulator, DT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchOptions {
    pub layers: usize,
    /// Column height [m].
    pub column_height: f64,
    /// Sludge blanket threshold as a fraction of the initial concentration.
    pub threshold_fraction: f64,
    pub cfl: f64,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            layers: 100,
            column_height: 1.0,
            threshold_fraction: 0.1,
            cfl: 0.5,
        }
    }
}

impl BatchOptions {
    pub fn validate(&self) -> Result<()> {
        if self.layers < 2 {
            return Err(Error::invalid("batch", "at least two layers are required"));
        }
        if !(self.column_height > 0.0 && self.column_height.is_finite()) {
            return Err(Error::invalid("batch", "column_height must be positive"));
        }
        if !(self.threshold_fraction > 0.0 && self.threshold_fraction < 1.0) {
            return Err(Error::invalid("batch", "threshold_fraction must lie in (0, 1)"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid("batch", "cfl must lie in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub times: Vec<f64>,
    /// Sludge blanket height above the column bottom [m].
    pub sbl: Vec<f64>,
    /// Solids mass per unit area `Σ X Δz` [kg/m²] at each sample.
    pub mass: Vec<f64>,
    /// Concentration profile [kg/m³] at the last sample, top cell first.
    pub profile: Vec<f64>,
    pub steps: usize,
}

/// Depth below the top of the profile where the concentration first reaches
/// `threshold`, interpolated linearly between cell midpoints. A profile
/// already above the threshold in its first cell gives 0; a profile that
/// never reaches it gives the bottom `profile.len() * dz`.
pub fn sludge_blanket(profile: &[f64], dz: f64, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::domain(format!("threshold must be positive, got {threshold}")));
    }
    let Some(i) = profile.iter().position(|&x| x >= threshold) else {
        return Ok(profile.len() as f64 * dz);
    };
    if i == 0 {
        return Ok(0.0);
    }
    let (a, b) = (profile[i - 1], profile[i]);
    let mid = (i as f64 - 0.5) * dz;
    Ok(mid + (threshold - a) / (b - a) * dz)
}

/// Simulate a batch test starting from the uniform concentration `x_init`
/// [kg/m³] and return the blanket height at each of the (non-decreasing)
/// sample `times` [h].
pub fn batch_simulate(
    x_init: f64,
    times: &[f64],
    model: &SettlingModel,
    opts: &BatchOptions,
) -> Result<BatchResult> {
    opts.validate()?;
    if !(x_init >= 0.0 && x_init < model.params.rho_x) {
        return Err(Error::domain(format!("initial concentration {x_init} kg/m³ is inadmissible")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::invalid("batch", "sample times must be non-negative and non-decreasing"));
    }
    let n = opts.layers;
    let dz = opts.column_height / n as f64;
    if x_init == 0.0 {
        return Ok(BatchResult {
            times: times.to_vec(),
            sbl: vec![0.0; times.len()],
            mass: vec![0.0; times.len()],
            profile: vec![0.0; n],
            steps: 0,
        });
    }
    let threshold = opts.threshold_fraction * x_init;
    let mut x = vec![x_init; n];
    let mut t = 0.0;
    let mut steps = 0;
    let mut sbl = Vec::with_capacity(times.len());
    let mut mass = Vec::with_capacity(times.len());
    let mut flux = vec![0.0; n + 1];
    let mut d = vec![0.0; n];
    for &target in times {
        while t < target {
            for (di, &xi) in d.iter_mut().zip(&x) {
                *di = model.d_c(xi);
            }
            let mut dt = DT_CAP;
            for k in 1..n {
                let v = model.v_hs(x[k]) - (d[k] - d[k - 1]) / dz;
                flux[k] = v.min(0.0) * x[k] + v.max(0.0) * x[k - 1];
                dt = dt.min(dz / (v.abs() + model.params.v0));
                let comp = model.d_comp(x[k]).abs().max(model.d_comp(x[k - 1]).abs());
                if comp > 0.0 {
                    dt = dt.min(dz * dz / (2.0 * comp));
                }
            }
            dt = (opts.cfl * dt).min(target - t);
            for i in 0..n {
                x[i] -= dt * (flux[i + 1] - flux[i]) / dz;
            }
            if let Some(i) = x.iter().position(|v| !v.is_finite() || *v >= model.params.rho_x) {
                return Err(Error::Numerical {
                    t,
                    message: format!("batch column layer {i} left the admissible range"),
                });
            }
            t += dt;
            steps += 1;
            if target - t < 1e-12 * target.max(1.0) {
                t = target;
            }
        }
        let depth = sludge_blanket(&x, dz, threshold)?;
        sbl.push(opts.column_height - depth);
        mass.push(x.iter().sum::<f64>() * dz);
    }
    Ok(BatchResult {
        times: times.to_vec(),
        sbl,
        mass,
        profile: x,
        steps,
    })
}

impl Simulator {
    /// Depth coordinate `z` of the sludge blanket in the tank: the first
    /// crossing of `threshold` [kg/m³] by the interior TSS profile, from the
    /// effluent level downwards.
    pub fn sludge_blanket(&self, state: &SimulationState, threshold: f64) -> Result<f64> {
        let n = self.grid.layers();
        let x: Vec<f64> = state.tss_profile()[1..=n].iter().map(|v| v / 1000.0).collect();
        let depth = sludge_blanket(&x, self.grid.dz, threshold)?;
        Ok(depth - self.grid.config.height_above_feed)
    }
}
