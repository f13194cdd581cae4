//! Modified ASM1 biokinetics.
//!
//! Compared with the standard model, the two heterotrophic growth
//! processes carry an extra Monod factor in `S_NH` with a small
//! half-saturation constant, and the hydrolysis rates are written so that
//! they stay well defined when `X_S` and `X_BH` both vanish. With these
//! changes no process consumes a component whose concentration is zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const N_PARTICULATES: usize = 6;
pub const N_SOLUBLES: usize = 7;
pub const N_PROCESSES: usize = 8;

/// `(X_I, X_S, X_BH, X_BA, X_P, X_ND)` in g COD/m³ (g N/m³ for `X_ND`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Particulates(pub [f64; N_PARTICULATES]);

/// `(S_I, S_S, S_O, S_NO, S_NH, S_ND, S_ALK)`; alkalinity in mol CaCO₃/m³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Solubles(pub [f64; N_SOLUBLES]);

impl Particulates {
    pub const X_I: usize = 0;
    pub const X_S: usize = 1;
    pub const X_BH: usize = 2;
    pub const X_BA: usize = 3;
    pub const X_P: usize = 4;
    pub const X_ND: usize = 5;
    pub const NAMES: [&'static str; N_PARTICULATES] = ["X_I", "X_S", "X_BH", "X_BA", "X_P", "X_ND"];
}

impl Solubles {
    pub const S_I: usize = 0;
    pub const S_S: usize = 1;
    pub const S_O: usize = 2;
    pub const S_NO: usize = 3;
    pub const S_NH: usize = 4;
    pub const S_ND: usize = 5;
    pub const S_ALK: usize = 6;
    pub const NAMES: [&'static str; N_SOLUBLES] = ["S_I", "S_S", "S_O", "S_NO", "S_NH", "S_ND", "S_ALK"];
}

/// Stoichiometric and kinetic parameters.
///
/// Rate constants are in the units they are usually tabulated in (per
/// day); [`Asm1Params::per_hour`] converts them for the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Asm1Params {
    pub y_a: f64,
    pub y_h: f64,
    pub f_p: f64,
    pub i_xb: f64,
    pub i_xp: f64,
    pub mu_h: f64,
    pub k_s: f64,
    pub k_oh: f64,
    pub k_no: f64,
    pub b_h: f64,
    pub eta_g: f64,
    pub eta_h: f64,
    pub k_h: f64,
    pub k_x: f64,
    pub mu_a: f64,
    pub kbar_nh: f64,
    pub k_nh: f64,
    pub b_a: f64,
    pub k_oa: f64,
    pub k_a: f64,
}

impl Default for Asm1Params {
    fn default() -> Self {
        Asm1Params {
            y_a: 0.24,
            y_h: 0.57,
            f_p: 0.1,
            i_xb: 0.07,
            i_xp: 0.06,
            mu_h: 4.0,
            k_s: 20.0,
            k_oh: 0.25,
            k_no: 0.5,
            b_h: 0.5,
            eta_g: 0.8,
            eta_h: 0.35,
            k_h: 1.5,
            k_x: 0.02,
            mu_a: 0.879,
            kbar_nh: 0.007,
            k_nh: 1.0,
            b_a: 0.132,
            k_oa: 0.5,
            k_a: 0.08,
        }
    }
}

impl Asm1Params {
    fn fields(&self) -> [(&'static str, f64); 20] {
        [
            ("y_a", self.y_a),
            ("y_h", self.y_h),
            ("f_p", self.f_p),
            ("i_xb", self.i_xb),
            ("i_xp", self.i_xp),
            ("mu_h", self.mu_h),
            ("k_s", self.k_s),
            ("k_oh", self.k_oh),
            ("k_no", self.k_no),
            ("b_h", self.b_h),
            ("eta_g", self.eta_g),
            ("eta_h", self.eta_h),
            ("k_h", self.k_h),
            ("k_x", self.k_x),
            ("mu_a", self.mu_a),
            ("kbar_nh", self.kbar_nh),
            ("k_nh", self.k_nh),
            ("b_a", self.b_a),
            ("k_oa", self.k_oa),
            ("k_a", self.k_a),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.fields() {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("asm1", format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Same parameters with every time-dependent rate expressed per hour.
    pub fn per_hour(&self) -> Self {
        let mut p = *self;
        for rate in [&mut p.mu_h, &mut p.b_h, &mut p.k_h, &mut p.mu_a, &mut p.b_a, &mut p.k_a] {
            *rate /= 24.0;
        }
        p
    }
}

pub fn mu7(x_s: f64, x_bh: f64, k_x: f64) -> f64 {
    if x_s == 0.0 && x_bh == 0.0 {
        0.0
    } else {
        x_s * x_bh / (k_x * x_bh + x_s)
    }
}

pub fn mu8(x_bh: f64, x_nd: f64, x_s: f64, k_x: f64) -> f64 {
    if x_s == 0.0 && x_bh == 0.0 {
        0.0
    } else {
        x_bh * x_nd / (k_x * x_bh + x_s)
    }
}

#[inline]
fn monod(s: f64, k: f64) -> f64 {
    s / (k + s)
}

/// The eight process rates. Negative inputs are treated as zero.
pub fn rate_vector(c: &Particulates, s: &Solubles, p: &Asm1Params) -> [f64; N_PROCESSES] {
    let c = c.0.map(|v| v.max(0.0));
    let s = s.0.map(|v| v.max(0.0));
    let (x_s, x_bh, x_ba, x_nd) = (c[1], c[2], c[3], c[5]);
    let (s_s, s_o, s_no, s_nh, s_nd) = (s[1], s[2], s[3], s[4], s[5]);

    let nh_guard = monod(s_nh, p.kbar_nh);
    let substrate = monod(s_s, p.k_s);
    let aerobic = monod(s_o, p.k_oh);
    let anoxic = p.k_oh / (p.k_oh + s_o);
    let nitrate = monod(s_no, p.k_no);
    let hydrolysis_switch = aerobic + p.eta_h * anoxic * nitrate;

    [
        p.mu_h * nh_guard * substrate * aerobic * x_bh,
        p.mu_h * nh_guard * substrate * anoxic * nitrate * p.eta_g * x_bh,
        p.mu_a * monod(s_nh, p.k_nh) * monod(s_o, p.k_oa) * x_ba,
        p.b_h * x_bh,
        p.b_a * x_ba,
        p.k_a * s_nd * x_bh,
        p.k_h * mu7(x_s, x_bh, p.k_x) * hydrolysis_switch,
        p.k_h * mu8(x_bh, x_nd, x_s, p.k_x) * hydrolysis_switch,
    ]
}

/// Stoichiometric matrices for a parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct Stoichiometry {
    pub particulate: [[f64; N_PROCESSES]; N_PARTICULATES],
    pub soluble: [[f64; N_PROCESSES]; N_SOLUBLES],
}

impl Stoichiometry {
    pub fn new(p: &Asm1Params) -> Self {
        let decay_n = p.i_xb - p.f_p * p.i_xp;
        let particulate = [
            [0.0; 8],
            [0.0, 0.0, 0.0, 1.0 - p.f_p, 1.0 - p.f_p, 0.0, -1.0, 0.0],
            [1.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, p.f_p, p.f_p, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, decay_n, decay_n, 0.0, 0.0, -1.0],
        ];
        let inv_yh = 1.0 / p.y_h;
        let inv_ya = 1.0 / p.y_a;
        let soluble = [
            [0.0; 8],
            [-inv_yh, -inv_yh, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
            [-(1.0 - p.y_h) * inv_yh, 0.0, -(4.57 - p.y_a) * inv_ya, 0.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, -(1.0 - p.y_h) / (2.86 * p.y_h), inv_ya, 0.0, 0.0, 0.0, 0.0, 0.0],
            [-p.i_xb, -p.i_xb, -p.i_xb - inv_ya, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0],
            [
                -p.i_xb / 14.0,
                (1.0 - p.y_h) / (40.04 * p.y_h) - p.i_xb / 14.0,
                -p.i_xb / 14.0 - 1.0 / (7.0 * p.y_a),
                0.0,
                0.0,
                1.0 / 14.0,
                0.0,
                0.0,
            ],
        ];
        Stoichiometry { particulate, soluble }
    }
}

/// Reaction kinetics ready for use in the solver: rates and the
/// stoichiometric matrices built from one parameter set.
#[derive(Debug, Clone)]
pub struct Kinetics {
    pub params: Asm1Params,
    pub stoichiometry: Stoichiometry,
}

impl Kinetics {
    pub fn new(params: Asm1Params) -> Self {
        Kinetics {
            stoichiometry: Stoichiometry::new(&params),
            params,
        }
    }

    pub fn reactions(&self, c: &Particulates, s: &Solubles) -> (Particulates, Solubles) {
        let r = rate_vector(c, s, &self.params);
        let st = &self.stoichiometry;
        let mut rc = [0.0; N_PARTICULATES];
        let mut rs = [0.0; N_SOLUBLES];
        for (out, row) in rc.iter_mut().zip(&st.particulate) {
            *out = row.iter().zip(&r).map(|(a, b)| a * b).sum();
        }
        for (out, row) in rs.iter_mut().zip(&st.soluble) {
            *out = row.iter().zip(&r).map(|(a, b)| a * b).sum();
        }
        (Particulates(rc), Solubles(rs))
    }
}

/// Reaction terms `(R_C, R_S) = (σ_C r, σ_S r)`.
pub fn reactions(c: &Particulates, s: &Solubles, p: &Asm1Params) -> (Particulates, Solubles) {
    Kinetics::new(*p).reactions(c, s)
}
