//! Removal of the induction period from batch settling curves.
//!
//! Right after a batch test starts the sludge blanket accelerates from rest
//! before it descends at the hindered settling speed. The acceleration is
//! modelled by the factor
//!
//! ```text
//! G(t) = 1 - exp(-(t / t_bar)^p)
//! ```
//!
//! so that the early blanket level is `h0 - v ∫₀ᵗ G(s) ds`. Fitting
//! `(v, t_bar, p)` to the early part of a curve and replacing the time
//! axis by `τ(t) = ∫₀ᵗ G(s) ds` turns the curve into one that starts with
//! constant-speed descent, as the settling model predicts.

use serde::{Deserialize, Serialize};

use crate::calibration::{nelder_mead, ObjectiveSpec};
use crate::error::{Error, Result};
use crate::quadrature;

const QUAD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchCurve {
    /// Sample times [h], strictly increasing from 0.
    pub times: Vec<f64>,
    /// Sludge blanket height above the column bottom [m].
    pub sbl: Vec<f64>,
    /// Initial solids concentration [kg/m³].
    pub x_init: f64,
}

impl BatchCurve {
    pub fn new(times: Vec<f64>, sbl: Vec<f64>, x_init: f64) -> Result<Self> {
        let c = BatchCurve { times, sbl, x_init };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.times.len() != self.sbl.len() {
            return Err(Error::invalid("batch curve", "times and sbl differ in length"));
        }
        if self.times.len() < 5 {
            return Err(Error::invalid("batch curve", "at least 5 samples are required"));
        }
        if self.times[0] != 0.0 {
            return Err(Error::invalid("batch curve", "the first sample must be at t = 0"));
        }
        if self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("batch curve", "sample times must be strictly increasing"));
        }
        if self.sbl.iter().any(|h| !(h.is_finite() && *h >= 0.0)) {
            return Err(Error::invalid("batch curve", "sludge blanket levels must be non-negative"));
        }
        if !(self.x_init >= 0.0 && self.x_init.is_finite()) {
            return Err(Error::invalid("batch curve", "x_init must be non-negative"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductionFit {
    /// Settling speed reached after the induction period [m/h].
    pub v_settle: f64,
    /// Characteristic time of the induction period [h].
    pub t_bar: f64,
    /// Shape exponent.
    pub p_exp: f64,
    /// End of the induction period [h].
    pub t_induction_end: f64,
}

impl InductionFit {
    /// The acceleration factor `G(t)`.
    pub fn g(&self, t: f64) -> f64 {
        acceleration(t, self.t_bar, self.p_exp)
    }

    /// `∫₀ᵗ G(s) ds` [h].
    pub fn effective_time(&self, t: f64) -> f64 {
        effective_time(t, self.t_bar, self.p_exp)
    }

    /// Blanket level at each of the increasing `times`, starting from `h0`.
    pub fn predict(&self, h0: f64, times: &[f64]) -> Vec<f64> {
        cumulative_effective_time(times, self.t_bar, self.p_exp)
            .into_iter()
            .map(|tau| h0 - self.v_settle * tau)
            .collect()
    }
}

/// `G(t) = 1 - exp(-(t / t_bar)^p)`, zero for `t <= 0`.
pub fn acceleration(t: f64, t_bar: f64, p: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    -(-(t / t_bar).powf(p)).exp_m1()
}

/// `∫₀ᵗ G(s) ds` by adaptive quadrature.
pub fn effective_time(t: f64, t_bar: f64, p: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    quadrature::integrate(|s| acceleration(s, t_bar, p), 0.0, t, QUAD_REL_TOL, 0.0)
}

fn cumulative_effective_time(times: &[f64], t_bar: f64, p: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &t in times {
        if t > prev {
            acc += quadrature::integrate(|s| acceleration(s, t_bar, p), prev, t, QUAD_REL_TOL, 0.0);
            prev = t;
        }
        out.push(acc);
    }
    out
}

/// Descent speed [m/h] at every sample: central differences inside,
/// one-sided differences at both ends.
pub fn estimate_velocity(curve: &BatchCurve) -> Result<Vec<f64>> {
    let (t, h) = (&curve.times, &curve.sbl);
    let n = t.len();
    if n < 3 {
        return Err(Error::invalid("batch curve", "velocity estimation needs at least 3 samples"));
    }
    if t.windows(2).any(|w| w[1] == w[0]) {
        return Err(Error::invalid("batch curve", "duplicate time stamps"));
    }
    let mut v = Vec::with_capacity(n);
    v.push(-(h[1] - h[0]) / (t[1] - t[0]));
    for i in 1..n - 1 {
        v.push(-(h[i + 1] - h[i - 1]) / (t[i + 1] - t[i - 1]));
    }
    v.push(-(h[n - 1] - h[n - 2]) / (t[n - 1] - t[n - 2]));
    Ok(v)
}

/// Time of the largest 3-point moving average of the descent speed.
pub fn detect_induction_end(velocities: &[f64], times: &[f64]) -> Result<f64> {
    if velocities.len() != times.len() || velocities.is_empty() {
        return Err(Error::invalid("batch curve", "velocity and time series must have equal, non-zero length"));
    }
    let n = velocities.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            velocities[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let mut best = 0;
    for i in 1..n {
        // speeds equal up to rounding do not move the peak
        if smooth[i] > smooth[best] + 1e-9 * smooth[best].abs() {
            best = i;
        }
    }
    if best == n - 1 && n > 1 {
        log::warn!("descent speed still increasing at the last sample; using t = {}", times[n - 1]);
    }
    Ok(times[best])
}

/// Least-squares fit of the induction model to the samples in `[0, t_end]`.
pub fn fit_induction(curve: &BatchCurve, t_end: f64) -> Result<InductionFit> {
    curve.validate()?;
    let k = curve.times.partition_point(|&t| t <= t_end);
    if k < 4 {
        return Err(Error::invalid(
            "batch curve",
            format!("only {k} samples up to t = {t_end}; at least 4 are required"),
        ));
    }
    let times = &curve.times[..k];
    let data = &curve.sbl[..k];
    let h0 = data[0];
    let v_guess = estimate_velocity(curve)?[..k].iter().copied().fold(0.0, f64::max);
    if !(v_guess > 0.0) {
        return Err(Error::invalid("batch curve", "the blanket does not descend before the induction end"));
    }
    let objective = |theta: &[f64]| -> f64 {
        let (v, t_bar, p) = (theta[0].exp(), theta[1].exp(), theta[2].exp());
        let taus = cumulative_effective_time(times, t_bar, p);
        taus.iter().zip(data).map(|(tau, h)| (h0 - v * tau - h).powi(2)).sum()
    };
    let start = vec![v_guess.ln(), (t_end / 3.0).ln(), 1.5f64.ln()];
    let spec = ObjectiveSpec::new(start)
        .with_names(&["ln_v_settle", "ln_t_bar", "ln_p_exp"])
        .with_scale(vec![0.1, 0.2, 0.1])
        .with_tolerances(1e-10, 1e-30)
        .with_max_iterations(3000)
        .with_restarts(2);
    let r = nelder_mead(objective, &spec)?;
    Ok(InductionFit {
        v_settle: r.x[0].exp(),
        t_bar: r.x[1].exp(),
        p_exp: r.x[2].exp(),
        t_induction_end: t_end,
    })
}

/// Replace the time axis by `τ_i = ∫₀^{t_i} G(s) ds`.
pub fn rescale_time(curve: &BatchCurve, fit: &InductionFit) -> BatchCurve {
    BatchCurve {
        times: cumulative_effective_time(&curve.times, fit.t_bar, fit.p_exp),
        sbl: curve.sbl.clone(),
        x_init: curve.x_init,
    }
}

/// Velocity estimate, peak detection, model fit and time rescaling in one go.
pub fn remove_induction(curve: &BatchCurve) -> Result<(InductionFit, BatchCurve)> {
    let v = estimate_velocity(curve)?;
    let t_end = detect_induction_end(&v, &curve.times)?;
    if t_end <= curve.times[0] {
        // the blanket is fastest from the start: no induction period
        let fit = InductionFit {
            v_settle: v[0],
            t_bar: 0.0,
            p_exp: 1.0,
            t_induction_end: t_end,
        };
        return Ok((fit, curve.clone()));
    }
    let fit = fit_induction(curve, t_end)?;
    Ok((fit, rescale_time(curve, &fit)))
}
