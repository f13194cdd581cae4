//! Calibration of the dispersion and feed-mixing parameters against
//! steady-state concentration profiles.
//!
//! Every objective evaluation runs the tank to steady state. It starts from
//! the converged state of the best parameter vector seen so far, so that
//! successive evaluations only have to relax a small perturbation.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::asm1::{Particulates, Solubles};
use crate::constitutive::DispersionParams;
use crate::error::{Error, Result};
use crate::solver::{SimulationState, Simulator};

use super::{nelder_mead, NelderMeadResult, ObjectiveSpec};

/// Measured concentrations at one depth, in g/m³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyDataPoint {
    /// Depth below the feed level [m].
    pub z: f64,
    pub tss: f64,
    /// Soluble COD `S_I + S_S`.
    pub cod: f64,
    pub s_o: f64,
    pub s_no: f64,
    pub s_nh: f64,
}

impl SteadyDataPoint {
    fn values(&self) -> [f64; 5] {
        [self.tss, self.cod, self.s_o, self.s_no, self.s_nh]
    }
}

pub fn validate_data(data: &[SteadyDataPoint], sim: &Simulator) -> Result<()> {
    let cfg = &sim.grid.config;
    for d in data {
        if !(d.z >= -cfg.height_above_feed && d.z <= cfg.depth_below_feed) {
            return Err(Error::invalid("steady data", format!("depth {} lies outside the tank", d.z)));
        }
        if d.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::invalid("steady data", format!("negative or non-finite value at z = {}", d.z)));
        }
    }
    Ok(())
}

/// Simulated counterpart of a data point, sampled at depth `z`.
pub fn sample_state(sim: &Simulator, state: &SimulationState, z: f64) -> SteadyDataPoint {
    let pick = |f: &dyn Fn(&Particulates, &Solubles) -> f64| -> f64 {
        let profile: Vec<f64> = state
            .c
            .iter()
            .zip(&state.s)
            .map(|(c, s)| f(&Particulates(*c), &Solubles(*s)))
            .collect();
        sim.sample_profile(&profile, z)
    };
    SteadyDataPoint {
        z,
        tss: pick(&|c, _| crate::constitutive::tss_unchecked(&c.0)),
        cod: pick(&|_, s| s.0[Solubles::S_I] + s.0[Solubles::S_S]),
        s_o: pick(&|_, s| s.0[Solubles::S_O]),
        s_no: pick(&|_, s| s.0[Solubles::S_NO]),
        s_nh: pick(&|_, s| s.0[Solubles::S_NH]),
    }
}

/// Sum over the five measured quantities of the absolute deviations,
/// each normalized by the largest measured value of that quantity.
pub fn profile_error(sim: &Simulator, state: &SimulationState, data: &[SteadyDataPoint]) -> f64 {
    let mut scale = [0.0f64; 5];
    for d in data {
        for (s, v) in scale.iter_mut().zip(d.values()) {
            *s = s.max(v);
        }
    }
    for s in &mut scale {
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut total = 0.0;
    for d in data {
        let sim_values = sample_state(sim, state, d.z).values();
        for ((a, b), s) in sim_values.iter().zip(d.values()).zip(scale) {
            total += (a - b).abs() / s;
        }
    }
    total
}

#[derive(Debug, Clone)]
pub struct DispersionEvaluation {
    pub value: f64,
    pub state: SimulationState,
    /// Whether the steady-state tolerance was met before `t_end`.
    pub converged: bool,
}

/// Run `sim` with dispersion `params` from `warm` to steady state and
/// score the result against `data`.
pub fn e_disp(
    sim: &Simulator,
    params: DispersionParams,
    data: &[SteadyDataPoint],
    warm: &SimulationState,
) -> Result<DispersionEvaluation> {
    params.validate()?;
    let sim = Simulator {
        dispersion: params,
        ..sim.clone()
    };
    let mut start = warm.clone();
    start.t = 0.0;
    let run = sim.run(&start)?;
    if !run.steady {
        log::warn!("dispersion evaluation at {:?} did not reach steady state", params.as_array());
    }
    let value = profile_error(&sim, &run.final_state, data);
    Ok(DispersionEvaluation {
        value,
        state: run.final_state,
        converged: run.steady,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DispersionMode {
    /// Fit `(d_X, d_L, α1, α2)`.
    Full,
    /// Fit `(d_X, d_L)` with the feed mixing switched off.
    Reduced,
}

impl DispersionMode {
    pub fn names(&self) -> &'static [&'static str] {
        match self {
            DispersionMode::Full => &["d_x", "d_l", "alpha1", "alpha2"],
            DispersionMode::Reduced => &["d_x", "d_l"],
        }
    }

    pub fn params(&self, x: &[f64]) -> DispersionParams {
        match self {
            DispersionMode::Full => DispersionParams::new(x[0], x[1], x[2], x[3]),
            DispersionMode::Reduced => DispersionParams::new(x[0], x[1], 0.0, 0.0),
        }
    }

    fn default_scale(&self) -> Vec<f64> {
        match self {
            DispersionMode::Full => vec![0.002, 0.02, 0.01, 0.05],
            DispersionMode::Reduced => vec![0.02, 0.02],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub params: Vec<f64>,
    pub value: f64,
    /// Index of the evaluation whose state seeded this one; `None` for the
    /// initial state.
    pub seed: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct DispersionFit {
    pub params: DispersionParams,
    pub value: f64,
    pub optimizer: NelderMeadResult,
    pub state: SimulationState,
    pub evaluations: Vec<EvaluationRecord>,
}

#[derive(Debug, Clone)]
pub struct DispersionFitOptions {
    pub mode: DispersionMode,
    /// Starting point; zero when absent.
    pub initial: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    pub scale: Option<Vec<f64>>,
    pub max_iterations: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    /// Fresh simplices built around the best point after convergence; they
    /// recover dimensions lost when the simplex collapses onto a bound.
    pub restarts: usize,
}

impl Default for DispersionFitOptions {
    fn default() -> Self {
        DispersionFitOptions {
            mode: DispersionMode::Full,
            initial: None,
            upper: None,
            scale: None,
            max_iterations: 400,
            x_tol: 1e-6,
            f_tol: 1e-9,
            restarts: 3,
        }
    }
}

struct Chain {
    best_value: f64,
    best_state: SimulationState,
    best_index: Option<usize>,
    records: Vec<EvaluationRecord>,
}

/// Minimize the profile error over the dispersion parameters.
pub fn fit_dispersion(
    sim: &Simulator,
    data: &[SteadyDataPoint],
    initial_state: &SimulationState,
    opts: &DispersionFitOptions,
) -> Result<DispersionFit> {
    validate_data(data, sim)?;
    let mode = opts.mode;
    let n = mode.names().len();
    let x0 = opts.initial.clone().unwrap_or_else(|| vec![0.0; n]);
    let scale = opts.scale.clone().unwrap_or_else(|| mode.default_scale());
    let upper = opts.upper.clone().unwrap_or_else(|| vec![f64::INFINITY; n]);
    if x0.len() != n || scale.len() != n || upper.len() != n {
        return Err(Error::invalid("calibration", format!("expected {n} dispersion parameters")));
    }
    let chain = Mutex::new(Chain {
        best_value: f64::INFINITY,
        best_state: initial_state.clone(),
        best_index: None,
        records: Vec::new(),
    });
    let objective = |x: &[f64]| -> f64 {
        let (seed_state, seed) = {
            let c = chain.lock().unwrap();
            (c.best_state.clone(), c.best_index)
        };
        let result = e_disp(sim, mode.params(x), data, &seed_state);
        let mut c = chain.lock().unwrap();
        let index = c.records.len();
        let value = match result {
            Ok(ev) => {
                if ev.value < c.best_value {
                    c.best_value = ev.value;
                    c.best_state = ev.state;
                    c.best_index = Some(index);
                }
                ev.value
            }
            Err(e) => {
                log::warn!("dispersion evaluation failed: {e}");
                f64::INFINITY
            }
        };
        c.records.push(EvaluationRecord {
            params: x.to_vec(),
            value,
            seed,
        });
        value
    };
    let spec = ObjectiveSpec::new(x0)
        .with_names(mode.names())
        .with_bounds(upper.iter().map(|&u| (0.0, u)).collect())
        .with_scale(scale)
        .with_tolerances(opts.x_tol, opts.f_tol)
        .with_max_iterations(opts.max_iterations)
        .with_restarts(opts.restarts);
    let r = nelder_mead(objective, &spec)?;
    let chain = chain.into_inner().unwrap();
    Ok(DispersionFit {
        params: mode.params(&r.x),
        value: r.f,
        optimizer: r,
        state: chain.best_state,
        evaluations: chain.records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm1::Asm1Params;
    use crate::constitutive::SettlingParams;
    use crate::geometry::TankConfig;
    use crate::scenario;
    use crate::solver::SolverOptions;

    fn sim(layers: usize) -> Simulator {
        Simulator::new(
            &TankConfig::default().with_layers(layers),
            SettlingParams::default(),
            DispersionParams::default(),
            Asm1Params::default(),
            scenario::scenario_m(),
            SolverOptions {
                t_end: 2.0,
                ..Default::default()
            },
        )
        .unwrap()
    }

    fn initial(sim: &Simulator) -> SimulationState {
        SimulationState::uniform(&sim.grid, scenario::initial_particulates(), scenario::initial_solubles())
    }

    const DEPTHS: [f64; 4] = [-0.6, 0.2, 0.6, 1.0];

    #[test]
    fn perfect_match_scores_zero() {
        let s = sim(30);
        let st = initial(&s);
        let data: Vec<_> = DEPTHS.iter().map(|&z| sample_state(&s, &st, z)).collect();
        assert_eq!(profile_error(&s, &st, &data), 0.0);
    }

    #[test]
    fn normalization_by_largest_value() {
        let s = sim(30);
        let st = initial(&s);
        let mut data: Vec<_> = DEPTHS.iter().map(|&z| sample_state(&s, &st, z)).collect();
        let max_tss = data.iter().map(|d| d.tss).fold(0.0, f64::max);
        // raising the smallest TSS value keeps the maximum unchanged
        data[0].tss += max_tss;
        let max_after = data.iter().map(|d| d.tss).fold(0.0, f64::max);
        let e = profile_error(&s, &st, &data);
        assert!((e - max_tss / max_after).abs() < 1e-12, "{e}");
        data.reverse();
        assert!((profile_error(&s, &st, &data) - e).abs() < 1e-15);
    }

    #[test]
    fn all_zero_data_uses_unit_scale() {
        let s = sim(30);
        let st = SimulationState::zeros(&s.grid);
        let data = vec![
            SteadyDataPoint {
                z: 0.1,
                tss: 0.0,
                cod: 0.0,
                s_o: 0.0,
                s_no: 0.0,
                s_nh: 0.0,
            };
            2
        ];
        assert_eq!(profile_error(&s, &st, &data), 0.0);
    }

    #[test]
    fn out_of_tank_depth_rejected() {
        let s = sim(30);
        let mut d = sample_state(&s, &initial(&s), 0.0);
        d.z = 2.0;
        assert!(validate_data(&[d], &s).is_err());
    }

    #[test]
    fn warm_restart_reproduces_value() {
        let mut s = sim(30);
        s.options.t_end = 60.0;
        let p = DispersionParams::new(0.004, 0.04, 0.017, 0.09);
        let truth = e_disp(&s, p, &[], &initial(&s)).unwrap();
        assert!(truth.converged);
        let data: Vec<_> = DEPTHS.iter().map(|&z| sample_state(&s, &truth.state, z)).collect();
        let a = e_disp(&s, p, &data, &truth.state).unwrap();
        let b = e_disp(&s, p, &data, &a.state).unwrap();
        assert!(a.value < 1e-3, "{}", a.value);
        assert!((a.value - b.value).abs() < 1e-6);
    }
}
