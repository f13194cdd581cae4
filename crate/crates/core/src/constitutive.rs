//! Constitutive closures of the settling model.
//!
//! All functions of the solids concentration take `X` in kg/m³ and work in
//! metres and hours. The TSS conversion [`tss`] returns g/m³ from
//! particulate concentrations in ASM1 units.

use serde::{Deserialize, Serialize};

use crate::asm1::Particulates;
use crate::error::{Error, Result};
use crate::quadrature;

/// COD-to-mass conversion factor `κ0` [g/(g COD)].
pub const KAPPA0: f64 = 0.75;

/// Standard gravity converted to m/h².
pub const GRAVITY_M_PER_H2: f64 = 9.81 * 3600.0 * 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SettlingParams {
    /// Maximal settling velocity [m/h].
    pub v0: f64,
    /// Scale concentration `X̄` [kg/m³].
    pub xbar: f64,
    /// Hindered-settling exponent `η`.
    pub eta: f64,
    /// Effective stress slope `α` [m²/h²].
    pub alpha: f64,
    /// Critical concentration `X_c` [kg/m³].
    pub xc: f64,
    /// Solids density [kg/m³].
    pub rho_x: f64,
    /// Solid–liquid density difference [kg/m³].
    pub delta_rho: f64,
    /// Gravity [m/h²].
    pub g: f64,
}

impl Default for SettlingParams {
    fn default() -> Self {
        SettlingParams {
            v0: 6.46,
            xbar: 1.89,
            eta: 2.55,
            alpha: 381_605.95,
            xc: 3.2,
            rho_x: 1050.0,
            delta_rho: 52.0,
            g: GRAVITY_M_PER_H2,
        }
    }
}

impl SettlingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("v0", self.v0), ("alpha", self.alpha)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("settling", format!("{name} must be non-negative, got {v}")));
            }
        }
        let fields = [
            ("xbar", self.xbar),
            ("eta", self.eta),
            ("xc", self.xc),
            ("rho_x", self.rho_x),
            ("delta_rho", self.delta_rho),
            ("g", self.g),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("settling", format!("{name} must be positive, got {v}")));
            }
        }
        if self.eta <= 1.0 {
            return Err(Error::invalid("settling", format!("eta must exceed 1, got {}", self.eta)));
        }
        if self.xc >= self.rho_x {
            return Err(Error::invalid("settling", "xc must be below rho_x"));
        }
        Ok(())
    }

    /// Copy with the four calibrated constitutive parameters replaced.
    pub fn with_fitted(mut self, v0: f64, xbar: f64, eta: f64, alpha: f64) -> Self {
        self.v0 = v0;
        self.xbar = xbar;
        self.eta = eta;
        self.alpha = alpha;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    /// Particle dispersivity `d_X` [m].
    pub d_x: f64,
    /// Solute dispersivity `d_L` [m].
    pub d_l: f64,
    /// Feed mixing magnitude `α1` [1/m].
    pub alpha1: f64,
    /// Feed mixing width factor `α2` [h/m²].
    pub alpha2: f64,
}

impl DispersionParams {
    pub fn new(d_x: f64, d_l: f64, alpha1: f64, alpha2: f64) -> Self {
        DispersionParams { d_x, d_l, alpha1, alpha2 }
    }

    /// Calibrated values for the pilot tank with feed mixing.
    pub fn fitted() -> Self {
        Self::new(0.004157, 0.03817, 0.01678, 0.0895)
    }

    /// Calibrated values without feed mixing.
    pub fn fitted_reduced() -> Self {
        Self::new(0.07044, 0.04837, 0.0, 0.0)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.d_x, self.d_l, self.alpha1, self.alpha2]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in ["d_x", "d_l", "alpha1", "alpha2"].iter().zip(self.as_array()) {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("dispersion", format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// TSS mass concentration [g/m³] of a particulate vector.
pub fn tss(c: &Particulates) -> Result<f64> {
    if let Some(v) = c.0.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::domain(format!("negative particulate concentration {v}")));
    }
    Ok(tss_unchecked(&c.0))
}

#[inline]
pub(crate) fn tss_unchecked(c: &[f64; 6]) -> f64 {
    KAPPA0 * (c[0] + c[1] + c[2] + c[3] + c[4]) + c[5]
}

/// Hindered settling velocity [m/h].
#[inline]
pub fn v_hs(x: f64, p: &SettlingParams) -> f64 {
    let x = x.max(0.0);
    p.v0 / (1.0 + (x / p.xbar).powf(p.eta))
}

/// Derivative of [`v_hs`] with respect to `X`.
pub fn v_hs_derivative(x: f64, p: &SettlingParams) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let r = (x / p.xbar).powf(p.eta);
    -p.v0 * p.eta * r / (x * (1.0 + r) * (1.0 + r))
}

/// Effective solids stress `σ_e`.
pub fn sigma_e(x: f64, p: &SettlingParams) -> f64 {
    if x <= p.xc {
        0.0
    } else {
        p.alpha * (x - p.xc) * v_hs(x, p)
    }
}

/// Analytic derivative of [`sigma_e`]; the right limit is used at `X_c`.
pub fn sigma_e_derivative(x: f64, p: &SettlingParams) -> f64 {
    if x < p.xc {
        0.0
    } else {
        p.alpha * (v_hs(x, p) + (x - p.xc) * v_hs_derivative(x, p))
    }
}

/// Compression coefficient `d_comp` [m²/h per kg/m³].
///
/// Negative where `σ_e` decreases (beyond its maximum).
pub fn d_comp(x: f64, p: &SettlingParams) -> f64 {
    if x <= p.xc {
        0.0
    } else {
        d_comp_right(x, p)
    }
}

/// `d_comp` without the `X <= X_c` cut-off; at `X_c` this is the limit from above.
fn d_comp_right(x: f64, p: &SettlingParams) -> f64 {
    p.rho_x * v_hs(x, p) * sigma_e_derivative(x, p) / (x * p.g * p.delta_rho)
}

/// Feed-inlet mixing coefficient `d_mix` [m²/h].
pub fn d_mix(z: f64, q_u: f64, q_e: f64, dp: &DispersionParams) -> f64 {
    let peak = dp.alpha1 * (q_u + q_e);
    let bump = |width: f64| -> f64 {
        if width <= 0.0 {
            return 0.0;
        }
        let s = z.abs() / width;
        if s >= 1.0 {
            0.0
        } else {
            peak * (-(s * s) / (1.0 - s)).exp()
        }
    };
    if z < 0.0 {
        bump(dp.alpha2 * q_e)
    } else if z > 0.0 {
        bump(dp.alpha2 * q_u)
    } else if dp.alpha2 * q_u.max(q_e) > 0.0 {
        peak
    } else {
        0.0
    }
}

const TABLE_NODES: usize = 2000;
// Node spacing is uniform in s = ln(1 + (X - X_c) / TABLE_SCALE).
const TABLE_SCALE: f64 = 1.0;

/// Settling parameters bundled with a tabulated primitive
/// `D_C(X) = ∫_{X_c}^{X} d_comp`.
///
/// The table stores exact node values (Gauss–Legendre per interval) and
/// interpolates with cubic Hermite polynomials using the analytic
/// derivative `d_comp` at the nodes.
#[derive(Debug, Clone)]
pub struct SettlingModel {
    pub params: SettlingParams,
    ds: f64,
    x_nodes: Vec<f64>,
    d_nodes: Vec<f64>,
    slopes: Vec<f64>,
}

impl SettlingModel {
    pub fn new(params: SettlingParams) -> Result<Self> {
        params.validate()?;
        let x_max = 0.5 * params.rho_x;
        let s_max = (1.0 + (x_max - params.xc) / TABLE_SCALE).ln();
        let ds = s_max / (TABLE_NODES - 1) as f64;
        let x_nodes: Vec<f64> = (0..TABLE_NODES)
            .map(|i| params.xc + TABLE_SCALE * ((i as f64 * ds).exp() - 1.0))
            .collect();
        let mut d_nodes = Vec::with_capacity(TABLE_NODES);
        d_nodes.push(0.0);
        for w in x_nodes.windows(2) {
            let prev = *d_nodes.last().unwrap();
            d_nodes.push(prev + quadrature::gauss_legendre_8(|x| d_comp_right(x, &params), w[0], w[1]));
        }
        let slopes = x_nodes.iter().map(|&x| d_comp_right(x, &params)).collect();
        Ok(SettlingModel {
            params,
            ds,
            x_nodes,
            d_nodes,
            slopes,
        })
    }

    pub fn v_hs(&self, x: f64) -> f64 {
        v_hs(x, &self.params)
    }

    pub fn d_comp(&self, x: f64) -> f64 {
        d_comp(x, &self.params)
    }

    /// The compression primitive `D_C(X)`.
    pub fn d_c(&self, x: f64) -> f64 {
        let p = &self.params;
        if x <= p.xc {
            return 0.0;
        }
        let last = TABLE_NODES - 1;
        if x >= self.x_nodes[last] {
            let x_end = self.x_nodes[last];
            return self.d_nodes[last]
                + quadrature::integrate(|y| d_comp_right(y, p), x_end, x, 1e-12, 0.0);
        }
        let s = (1.0 + (x - p.xc) / TABLE_SCALE).ln();
        let i = ((s / self.ds) as usize).min(last - 1);
        // guard against rounding in the inverse map
        let i = if x < self.x_nodes[i] {
            i.saturating_sub(1)
        } else if x > self.x_nodes[i + 1] {
            i + 1
        } else {
            i
        };
        let (x0, x1) = (self.x_nodes[i], self.x_nodes[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.d_nodes[i] + h10 * h * self.slopes[i] + h01 * self.d_nodes[i + 1] + h11 * h * self.slopes[i + 1]
    }
}
