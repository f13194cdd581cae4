//! Face velocities and numerical fluxes.
//!
//! Face `j + 1/2` is stored at index `k = j + 1`, so it separates the cell
//! above (`j = k - 1`) from the cell below (`j + 1 = k`). The ghost rows
//! `j = -1` and `j = N + 2` carry zero concentration.

use crate::asm1::{N_PARTICULATES, N_SOLUBLES};
use crate::constitutive::{self, d_mix};
use crate::error::{Error, Result};

use super::{SimulationState, Simulator};

#[derive(Debug, Clone)]
pub struct FaceVelocities {
    /// Bulk velocity `q` [m/h].
    pub q: Vec<f64>,
    /// Particle velocity `v^X` [m/h].
    pub v_x: Vec<f64>,
    /// Solid velocity relative to the bulk used in the liquid flux `v^L` [m/h].
    pub v_l: Vec<f64>,
    /// Particulate diffusion coefficient (dispersion and mixing) [m²/h].
    pub diff_c: Vec<f64>,
    /// Soluble diffusion coefficient (dispersion and mixing) [m²/h].
    pub diff_s: Vec<f64>,
    /// Bound on the total diffusion coefficient including compression [m²/h].
    pub max_diffusion: Vec<f64>,
    /// TSS [kg/m³] of the cell below each face (cell `j + 1`).
    pub x_below: Vec<f64>,
    /// TSS [kg/m³] of the cell above each face (cell `j`).
    pub x_above: Vec<f64>,
}

impl Simulator {
    /// TSS [kg/m³] with the ghost rows: index `i` holds cell `i - 1`.
    fn solids_with_ghosts(&self, state: &SimulationState) -> Result<Vec<f64>> {
        let n = state.cells();
        let mut x = vec![0.0; n + 2];
        let rho = self.settling.params.rho_x;
        for (j, c) in state.c.iter().enumerate() {
            let v = constitutive::tss_unchecked(c) / 1000.0;
            if !(v < rho) {
                return Err(Error::Numerical {
                    t: state.t,
                    message: format!("solids concentration {v} kg/m³ in layer {j} reached rho_x = {rho}"),
                });
            }
            x[j + 1] = v;
        }
        Ok(x)
    }

    pub fn face_velocities(&self, state: &SimulationState) -> Result<FaceVelocities> {
        let g = &self.grid;
        let p = &self.settling.params;
        let dp = &self.dispersion;
        let (_, q_u, q_e) = self.flows(state.t);
        let xe = self.solids_with_ghosts(state)?;
        let de: Vec<f64> = xe.iter().map(|&x| self.settling.d_c(x)).collect();
        let vhs: Vec<f64> = xe.iter().map(|&x| self.settling.v_hs(x)).collect();
        let comp: Vec<f64> = xe.iter().map(|&x| self.settling.d_comp(x).abs()).collect();
        let chi = |x: f64| x > 0.0 && x < p.xc;
        // χ(X) ln X, zero outside (0, X_c)
        let ln_x: Vec<f64> = xe.iter().map(|&x| if chi(x) { x.ln() } else { 0.0 }).collect();
        let n_faces = g.z_faces.len();
        let q: Vec<f64> = (0..n_faces)
            .map(|k| if k <= g.feed_layer { -q_e / g.area_faces[k] } else { q_u / g.area_faces[k] })
            .collect();

        let mut f = FaceVelocities {
            q: q.clone(),
            v_x: vec![0.0; n_faces],
            v_l: vec![0.0; n_faces],
            diff_c: vec![0.0; n_faces],
            diff_s: vec![0.0; n_faces],
            max_diffusion: vec![0.0; n_faces],
            x_below: vec![0.0; n_faces],
            x_above: vec![0.0; n_faces],
        };
        for k in 0..n_faces {
            let (x_up, x_lo) = (xe[k], xe[k + 1]);
            f.x_above[k] = x_up;
            f.x_below[k] = x_lo;
            if !g.inside_face(k) {
                f.v_x[k] = q[k];
                continue;
            }
            let j_c = (de[k + 1] - de[k]) / g.dz;
            let j_d = (q[k].abs() * ln_x[k + 1] - q[k - 1].abs() * ln_x[k]) / g.dz;
            let settling = vhs[k + 1] - j_c;
            f.v_x[k] = q[k] + settling;
            f.v_l[k] = settling - dp.d_x * j_d;
            let mix = d_mix(g.z_faces[k], q_u, q_e, dp);
            let dispersion_x = if chi(x_lo) { q[k].abs() * dp.d_x } else { 0.0 };
            f.diff_c[k] = dispersion_x + mix;
            f.diff_s[k] = dp.d_l * f.v_l[k].abs() + mix;
            f.max_diffusion[k] = comp[k].max(comp[k + 1]) + f.diff_c[k].max(f.diff_s[k]);
        }
        Ok(f)
    }

    /// Particulate fluxes `Φ^C` [g/h] at every face.
    pub fn flux_c(&self, state: &SimulationState, f: &FaceVelocities) -> Vec<[f64; N_PARTICULATES]> {
        let g = &self.grid;
        let zero = [0.0; N_PARTICULATES];
        let n = state.cells();
        let mut phi = vec![zero; n + 1];
        for (k, out) in phi.iter_mut().enumerate() {
            let up = if k >= 1 { &state.c[k - 1] } else { &zero };
            let lo = if k < n { &state.c[k] } else { &zero };
            let (vm, vp) = (f.v_x[k].min(0.0), f.v_x[k].max(0.0));
            let d = f.diff_c[k] / g.dz;
            for i in 0..N_PARTICULATES {
                out[i] = g.area_faces[k] * (vm * lo[i] + vp * up[i] - d * (lo[i] - up[i]));
            }
        }
        phi
    }

    /// Soluble fluxes `Φ^S` [g/h] at every face.
    pub fn flux_s(&self, state: &SimulationState, f: &FaceVelocities) -> Vec<[f64; N_SOLUBLES]> {
        let g = &self.grid;
        let rho = self.settling.params.rho_x;
        let zero = [0.0; N_SOLUBLES];
        let n = state.cells();
        let mut phi = vec![zero; n + 1];
        for (k, out) in phi.iter_mut().enumerate() {
            let up = if k >= 1 { &state.s[k - 1] } else { &zero };
            let lo = if k < n { &state.s[k] } else { &zero };
            let (x_up, x_lo) = (f.x_above[k], f.x_below[k]);
            let q = f.q[k];
            let solid_flux = f.v_l[k].min(0.0) * x_lo + f.v_l[k].max(0.0) * x_up;
            let w_lo = ((rho - x_lo) * q - solid_flux).min(0.0) / (rho - x_lo);
            let w_up = ((rho - x_up) * q - solid_flux).max(0.0) / (rho - x_up);
            let d = f.diff_s[k] / g.dz;
            for i in 0..N_SOLUBLES {
                out[i] = g.area_faces[k] * (w_lo * lo[i] + w_up * up[i] - d * (lo[i] - up[i]));
            }
        }
        phi
    }
}
