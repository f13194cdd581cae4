//! Explicit finite-volume solver for the reactive settling system.
//!
//! The tank is split into `N` layers plus one effluent layer on top and one
//! underflow layer below. Each layer carries six particulate and seven
//! soluble concentrations. The method-of-lines right-hand side is built
//! from upwind convective fluxes, the compression velocity, dispersion and
//! feed mixing terms, the point source at the feed layer and the ASM1
//! reactions; it is advanced with forward Euler.

mod batch;
mod flux;

pub use batch::{batch_simulate, sludge_blanket, BatchOptions, BatchResult};
pub use flux::FaceVelocities;

use serde::{Deserialize, Serialize};

use crate::asm1::{Asm1Params, Kinetics, Particulates, Solubles, N_PARTICULATES, N_SOLUBLES};
use crate::constitutive::{self, DispersionParams, SettlingModel, SettlingParams};
use crate::error::{Error, Result};
use crate::geometry::{Grid, TankConfig};
use crate::scenario::Scenario;

/// Upper bound on the time step [h] (scaled by the CFL factor).
pub const DT_CAP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    /// Particulates per stored cell, row 0 is the effluent layer and row
    /// `N + 1` the underflow layer.
    pub c: Vec<[f64; N_PARTICULATES]>,
    pub s: Vec<[f64; N_SOLUBLES]>,
}

impl SimulationState {
    pub fn uniform(grid: &Grid, c: Particulates, s: Solubles) -> Self {
        SimulationState {
            t: 0.0,
            c: vec![c.0; grid.cells()],
            s: vec![s.0; grid.cells()],
        }
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::uniform(grid, Particulates::default(), Solubles::default())
    }

    pub fn cells(&self) -> usize {
        self.c.len()
    }

    /// TSS of every stored cell [g/m³].
    pub fn tss_profile(&self) -> Vec<f64> {
        self.c.iter().map(constitutive::tss_unchecked).collect()
    }

    pub fn effluent(&self) -> (Particulates, Solubles) {
        (Particulates(self.c[0]), Solubles(self.s[0]))
    }

    pub fn underflow(&self) -> (Particulates, Solubles) {
        let last = self.cells() - 1;
        (Particulates(self.c[last]), Solubles(self.s[last]))
    }

    /// Smallest particulate or non-alkalinity soluble value in the state.
    pub fn min_concentration(&self) -> f64 {
        let cmin = self.c.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let smin = self.s.iter().flat_map(|s| &s[..6]).copied().fold(f64::INFINITY, f64::min);
        cmin.min(smin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Continuous,
    /// All flows forced to zero.
    Batch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub cfl: f64,
    /// Final time [h].
    pub t_end: f64,
    /// Steady-state tolerance on `max |dC/dt|` relative to the feed scale
    /// of each component class [1/h]. A non-finite value disables the
    /// steady-state check.
    pub steady_tol: f64,
    /// Record a snapshot every this many steps (0 disables snapshots).
    pub output_stride: usize,
    pub mode: Mode,
    pub reactions: bool,
    /// Use this step instead of the adaptive one.
    pub fixed_dt: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            cfl: 0.5,
            t_end: 24.0,
            steady_tol: 1e-6,
            output_stride: 0,
            mode: Mode::Continuous,
            reactions: true,
            fixed_dt: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid("solver", format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::invalid("solver", format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.steady_tol.is_nan() || self.steady_tol < 0.0 {
            return Err(Error::invalid("solver", "steady_tol must be non-negative"));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::invalid("solver", "fixed_dt must be positive"));
            }
        }
        Ok(())
    }
}

/// Time derivatives of all stored cells.
#[derive(Debug, Clone)]
pub struct Derivative {
    pub dc: Vec<[f64; N_PARTICULATES]>,
    pub ds: Vec<[f64; N_SOLUBLES]>,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub final_state: SimulationState,
    pub snapshots: Vec<SimulationState>,
    pub steady: bool,
    pub steps: usize,
    /// Relative residual `max |dC/dt| / scale` at the last step [1/h].
    pub residual: f64,
    /// Smallest value of any tracked concentration over the whole run.
    pub min_concentration: f64,
    /// Number of layer evaluations where negative values were clamped
    /// before evaluating the reaction rates.
    pub clamped: usize,
}

/// A configured tank ready to integrate.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub grid: Grid,
    pub settling: SettlingModel,
    pub dispersion: DispersionParams,
    pub kinetics: Kinetics,
    pub scenario: Scenario,
    pub options: SolverOptions,
}

impl Simulator {
    /// `asm1` is given with per-day rates; they are converted here.
    pub fn new(
        tank: &TankConfig,
        settling: SettlingParams,
        dispersion: DispersionParams,
        asm1: Asm1Params,
        scenario: Scenario,
        options: SolverOptions,
    ) -> Result<Self> {
        let grid = crate::geometry::build_grid(tank)?;
        Self::with_model(grid, SettlingModel::new(settling)?, dispersion, asm1, scenario, options)
    }

    pub fn with_model(
        grid: Grid,
        settling: SettlingModel,
        dispersion: DispersionParams,
        asm1: Asm1Params,
        scenario: Scenario,
        options: SolverOptions,
    ) -> Result<Self> {
        dispersion.validate()?;
        asm1.validate()?;
        scenario.validate()?;
        options.validate()?;
        Ok(Simulator {
            grid,
            settling,
            dispersion,
            kinetics: Kinetics::new(asm1.per_hour()),
            scenario,
            options,
        })
    }

    /// `(Q_f, Q_u, Q_e)` honouring the batch mode.
    pub fn flows(&self, t: f64) -> (f64, f64, f64) {
        match self.options.mode {
            Mode::Batch => (0.0, 0.0, 0.0),
            Mode::Continuous => self.scenario.flows(t),
        }
    }

    fn check_state(&self, state: &SimulationState) -> Result<()> {
        if state.c.len() != self.grid.cells() || state.s.len() != self.grid.cells() {
            return Err(Error::invalid(
                "state",
                format!("expected {} cells, got {}", self.grid.cells(), state.c.len()),
            ));
        }
        Ok(())
    }

    /// Right-hand side of the semi-discrete system together with the face
    /// quantities it was built from.
    pub fn derivative(&self, state: &SimulationState) -> Result<(Derivative, FaceVelocities, usize)> {
        self.check_state(state)?;
        let faces = self.face_velocities(state)?;
        let phi_c = self.flux_c(state, &faces);
        let phi_s = self.flux_s(state, &faces);
        let g = &self.grid;
        let n_cells = g.cells();
        let (q_f, _, _) = self.flows(state.t);
        let feed_c = self.scenario.feed_particulates.at(state.t).0;
        let feed_s = self.scenario.feed_solubles.at(state.t).0;

        let mut dc = vec![[0.0; N_PARTICULATES]; n_cells];
        let mut ds = vec![[0.0; N_SOLUBLES]; n_cells];
        let mut clamped = 0;
        for j in 0..n_cells {
            let volume = g.area_cells[j] * g.dz;
            for k in 0..N_PARTICULATES {
                dc[j][k] = (phi_c[j][k] - phi_c[j + 1][k]) / volume;
            }
            for k in 0..N_SOLUBLES {
                ds[j][k] = (phi_s[j][k] - phi_s[j + 1][k]) / volume;
            }
            if j == g.feed_layer && q_f > 0.0 {
                for k in 0..N_PARTICULATES {
                    dc[j][k] += feed_c[k] * q_f / volume;
                }
                for k in 0..N_SOLUBLES {
                    ds[j][k] += feed_s[k] * q_f / volume;
                }
            }
            if self.options.reactions && g.inside_cell(j) {
                if state.c[j].iter().chain(&state.s[j][..6]).any(|v| *v < 0.0) {
                    clamped += 1;
                }
                let (rc, rs) = self.kinetics.reactions(&Particulates(state.c[j]), &Solubles(state.s[j]));
                for k in 0..N_PARTICULATES {
                    dc[j][k] += rc.0[k];
                }
                for k in 0..N_SOLUBLES {
                    ds[j][k] += rs.0[k];
                }
            }
        }
        Ok((Derivative { dc, ds }, faces, clamped))
    }

    /// Transport time-step bound: advective and parabolic limits over all
    /// faces, scaled by the CFL factor and capped at `cfl * DT_CAP`.
    pub fn stable_dt(&self, state: &SimulationState) -> Result<f64> {
        let faces = self.face_velocities(state)?;
        Ok(self.stable_dt_from(&faces))
    }

    fn stable_dt_from(&self, faces: &FaceVelocities) -> f64 {
        let dz = self.grid.dz;
        let v0 = self.settling.params.v0;
        let mut dt = DT_CAP;
        for k in 0..faces.q.len() {
            let speed = faces.v_x[k].abs() + faces.q[k].abs() + v0;
            dt = dt.min(dz / speed);
            let d = faces.max_diffusion[k];
            if d > 0.0 {
                dt = dt.min(dz * dz / (2.0 * d));
            }
        }
        self.options.cfl * dt
    }

    /// Step actually taken by [`Simulator::run`]: the transport bound, further
    /// limited so that no particulate or non-alkalinity soluble can turn
    /// negative in a forward Euler update.
    pub fn admissible_dt(&self, state: &SimulationState) -> Result<f64> {
        let (d, faces, _) = self.derivative(state)?;
        Ok(self.stable_dt_from(&faces).min(self.positivity_dt(state, &d)))
    }

    /// Largest step keeping every tracked concentration non-negative under
    /// a forward Euler update with the given derivative.
    fn positivity_dt(&self, state: &SimulationState, d: &Derivative) -> f64 {
        let mut dt = f64::INFINITY;
        for j in 0..state.cells() {
            for k in 0..N_PARTICULATES {
                let (v, r) = (state.c[j][k], d.dc[j][k]);
                if r < 0.0 && v > 0.0 {
                    dt = dt.min(v / -r);
                }
            }
            for k in 0..6 {
                let (v, r) = (state.s[j][k], d.ds[j][k]);
                if r < 0.0 && v > 0.0 {
                    dt = dt.min(v / -r);
                }
            }
        }
        self.options.cfl * dt
    }

    /// Forward Euler update over `dt`.
    pub fn step(&self, state: &SimulationState, dt: f64) -> Result<SimulationState> {
        let (d, _, _) = self.derivative(state)?;
        apply(state, &d, dt)
    }

    fn residual(&self, d: &Derivative, scales: (f64, f64)) -> f64 {
        let rc = d.dc.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        let rs = d.ds.iter().flat_map(|s| &s[..6]).fold(0.0f64, |m, v| m.max(v.abs()));
        (rc / scales.0).max(rs / scales.1)
    }

    fn residual_scales(&self, state: &SimulationState) -> (f64, f64) {
        let feed_c = constitutive::tss_unchecked(&self.scenario.feed_particulates.at(state.t).0);
        let feed_s = self.scenario.feed_solubles.at(state.t).0[..6].iter().copied().fold(0.0, f64::max);
        let state_c = state.tss_profile().into_iter().fold(0.0, f64::max);
        let state_s = state.s.iter().flat_map(|s| &s[..6]).copied().fold(0.0, f64::max);
        let scale_c = match self.options.mode {
            Mode::Continuous if feed_c > 0.0 => feed_c,
            _ => state_c,
        };
        let scale_s = match self.options.mode {
            Mode::Continuous if feed_s > 0.0 => feed_s,
            _ => state_s,
        };
        (scale_c.max(1e-12), scale_s.max(1e-12))
    }

    /// Integrate from `state0` until `t_end` or until the steady-state
    /// criterion is met.
    pub fn run(&self, state0: &SimulationState) -> Result<RunResult> {
        self.check_state(state0)?;
        let opts = &self.options;
        let scales = self.residual_scales(state0);
        let mut state = state0.clone();
        let mut snapshots = Vec::new();
        if opts.output_stride > 0 {
            snapshots.push(state.clone());
        }
        let mut steps = 0;
        let mut clamped = 0;
        let mut residual = f64::INFINITY;
        let mut steady = false;
        let mut min_conc = state.min_concentration();
        let t_end = opts.t_end;
        while state.t < t_end * (1.0 - 1e-14) {
            let (d, faces, c) = self.derivative(&state)?;
            clamped += c;
            let mut dt = match opts.fixed_dt {
                Some(dt) => dt,
                None => self.stable_dt_from(&faces).min(self.positivity_dt(&state, &d)),
            };
            dt = dt.min(t_end - state.t);
            if let Some(tc) = self.scenario.next_change(state.t) {
                if opts.mode == Mode::Continuous && tc - state.t > 1e-12 {
                    dt = dt.min(tc - state.t);
                }
            }
            if !(dt > 0.0) {
                return Err(Error::Numerical {
                    t: state.t,
                    message: format!("time step collapsed to {dt}"),
                });
            }
            residual = self.residual(&d, scales);
            state = apply(&state, &d, dt)?;
            steps += 1;
            min_conc = min_conc.min(state.min_concentration());
            if opts.output_stride > 0 && steps % opts.output_stride == 0 {
                snapshots.push(state.clone());
            }
            if opts.steady_tol.is_finite() && residual < opts.steady_tol {
                steady = true;
                break;
            }
        }
        if opts.output_stride > 0 && snapshots.last().map(|s| s.t) != Some(state.t) {
            snapshots.push(state.clone());
        }
        Ok(RunResult {
            final_state: state,
            snapshots,
            steady,
            steps,
            residual,
            min_concentration: min_conc,
            clamped,
        })
    }

    /// Linear interpolation of a per-cell profile at depth `z`, using the
    /// interior layer midpoints and constant extension beyond them.
    pub fn sample_profile(&self, profile: &[f64], z: f64) -> f64 {
        interpolate_midpoints(&self.grid, profile, z)
    }

    /// Total mass of each particulate component inside the tank layers.
    pub fn particulate_inventory(&self, state: &SimulationState) -> [f64; N_PARTICULATES] {
        let g = &self.grid;
        let mut m = [0.0; N_PARTICULATES];
        for j in 1..=g.layers() {
            for k in 0..N_PARTICULATES {
                m[k] += state.c[j][k] * g.area_cells[j] * g.dz;
            }
        }
        m
    }
}

pub(crate) fn interpolate_midpoints(g: &Grid, profile: &[f64], z: f64) -> f64 {
    let n = g.layers();
    let zc = &g.z_centers;
    if z <= zc[1] {
        return profile[1];
    }
    if z >= zc[n] {
        return profile[n];
    }
    let j = (((z - zc[1]) / g.dz) as usize + 1).min(n - 1);
    let w = (z - zc[j]) / g.dz;
    profile[j] * (1.0 - w) + profile[j + 1] * w
}

fn apply(state: &SimulationState, d: &Derivative, dt: f64) -> Result<SimulationState> {
    let mut next = state.clone();
    next.t = state.t + dt;
    for (row, dr) in next.c.iter_mut().zip(&d.dc) {
        for (v, r) in row.iter_mut().zip(dr) {
            *v += dt * r;
        }
    }
    for (row, dr) in next.s.iter_mut().zip(&d.ds) {
        for (v, r) in row.iter_mut().zip(dr) {
            *v += dt * r;
        }
    }
    if let Some(j) = (0..next.cells()).find(|&j| next.c[j].iter().chain(&next.s[j]).any(|v| !v.is_finite())) {
        return Err(Error::Numerical {
            t: state.t,
            message: format!("non-finite concentration in layer {j} after step dt = {dt:e}"),
        });
    }
    Ok(next)
}

#[cfg(test)]
mod tests;
