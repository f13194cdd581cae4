//! Derivative-free minimization with the Nelder–Mead simplex method.
//!
//! Reflection 1, expansion 2, outside and inside contraction 1/2 and
//! shrink 1/2. Bounds are enforced by projecting every trial point onto
//! the box.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub names: Vec<String>,
    pub initial: Vec<f64>,
    /// Per-coordinate `(lower, upper)`; infinite values mean unbounded.
    pub bounds: Vec<(f64, f64)>,
    /// Edge lengths of the initial simplex.
    pub scale: Vec<f64>,
    pub max_iterations: usize,
    /// Stop when every vertex lies within this max-norm distance of the best.
    pub x_tol: f64,
    /// Stop when the objective values of the simplex spread less than this.
    pub f_tol: f64,
    /// Number of fresh simplices built around the best point after the
    /// first convergence.
    pub restarts: usize,
    /// Evaluate independent vertices (initial simplex, shrink) in parallel.
    pub parallel: bool,
}

impl ObjectiveSpec {
    /// Unbounded problem with a 5% initial simplex (0.00025 for zero
    /// coordinates).
    pub fn new(initial: Vec<f64>) -> Self {
        let n = initial.len();
        let scale = initial
            .iter()
            .map(|&x| if x != 0.0 { 0.05 * x.abs() } else { 0.00025 })
            .collect();
        ObjectiveSpec {
            names: (0..n).map(|i| format!("x{i}")).collect(),
            initial,
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
            scale,
            max_iterations: 1000,
            x_tol: 1e-8,
            f_tol: 1e-16,
            restarts: 0,
            parallel: false,
        }
    }

    pub fn with_names(mut self, names: &[&str]) -> Self {
        self.names = names.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }

    pub fn with_scale(mut self, scale: Vec<f64>) -> Self {
        self.scale = scale;
        self
    }

    pub fn with_tolerances(mut self, x_tol: f64, f_tol: f64) -> Self {
        self.x_tol = x_tol;
        self.f_tol = f_tol;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn dim(&self) -> usize {
        self.initial.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::invalid("optimizer", "at least one parameter is required"));
        }
        if self.bounds.len() != n || self.scale.len() != n || self.names.len() != n {
            return Err(Error::invalid("optimizer", "names, bounds and scale must match the initial point"));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !(lo < hi) {
                return Err(Error::invalid("optimizer", format!("empty bounds for {}", self.names[i])));
            }
        }
        if self.scale.iter().any(|s| !(s.is_finite() && *s != 0.0)) {
            return Err(Error::invalid("optimizer", "simplex scale must be finite and non-zero"));
        }
        if !(self.x_tol > 0.0 && self.f_tol > 0.0) {
            return Err(Error::invalid("optimizer", "tolerances must be positive"));
        }
        Ok(())
    }

    fn project(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// Whether a tolerance was met before the iteration limit.
    pub converged: bool,
    /// Best objective value after each iteration.
    pub trace: Vec<f64>,
}

struct Simplex {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Simplex {
    fn sort(&mut self) {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| self.values[a].total_cmp(&self.values[b]));
        self.points = order.iter().map(|&i| self.points[i].clone()).collect();
        self.values = order.iter().map(|&i| self.values[i]).collect();
    }

    fn diameter(&self) -> f64 {
        let best = &self.points[0];
        self.points[1..]
            .iter()
            .flat_map(|p| p.iter().zip(best).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    fn spread(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimize `f` starting from `spec.initial`.
pub fn nelder_mead<F>(f: F, spec: &ObjectiveSpec) -> Result<NelderMeadResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    spec.validate()?;
    let n = spec.dim();
    let mut evaluations = 0usize;
    let eval_many = |pts: &[Vec<f64>]| -> Vec<f64> {
        if spec.parallel {
            pts.par_iter().map(|p| sanitize(f(p))).collect()
        } else {
            pts.iter().map(|p| sanitize(f(p))).collect()
        }
    };

    let mut x0 = spec.initial.clone();
    spec.project(&mut x0);
    let f0 = f(&x0);
    evaluations += 1;
    if !f0.is_finite() {
        return Err(Error::Numerical {
            t: 0.0,
            message: format!("objective is not finite at the initial point ({f0})"),
        });
    }

    let mut best = (x0, f0);
    let mut trace = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;
    for round in 0..=spec.restarts {
        let mut simplex = initial_simplex(&best.0, best.1, spec, &eval_many);
        evaluations += n;
        converged = false;
        while iterations < spec.max_iterations {
            simplex.sort();
            if simplex.diameter() < spec.x_tol || simplex.spread() <= spec.f_tol {
                converged = true;
                break;
            }
            iterations += 1;
            evaluations += iterate(&mut simplex, spec, &f, &eval_many);
            let current = simplex.values.iter().copied().fold(f64::INFINITY, f64::min);
            trace.push(current.min(trace.last().copied().unwrap_or(f64::INFINITY)));
        }
        simplex.sort();
        let improved = simplex.values[0] < best.1;
        let gain = best.1 - simplex.values[0];
        if improved {
            best = (simplex.points[0].clone(), simplex.values[0]);
        }
        if round > 0 && gain <= spec.f_tol {
            break;
        }
        if iterations >= spec.max_iterations {
            break;
        }
    }
    if !converged {
        log::warn!("Nelder-Mead stopped after {iterations} iterations without meeting its tolerances");
    }
    Ok(NelderMeadResult {
        x: best.0,
        f: best.1,
        iterations,
        evaluations,
        converged,
        trace,
    })
}

fn initial_simplex<E>(x0: &[f64], f0: f64, spec: &ObjectiveSpec, eval_many: &E) -> Simplex
where
    E: Fn(&[Vec<f64>]) -> Vec<f64>,
{
    let n = x0.len();
    let mut points = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += spec.scale[i];
        spec.project(&mut p);
        if p[i] == x0[i] {
            // sitting on a bound: step inwards instead
            p[i] -= spec.scale[i];
            spec.project(&mut p);
        }
        points.push(p);
    }
    let mut values = vec![f0];
    values.extend(eval_many(&points[1..]));
    Simplex { points, values }
}

/// One simplex update; returns the number of objective evaluations.
fn iterate<F, E>(s: &mut Simplex, spec: &ObjectiveSpec, f: &F, eval_many: &E) -> usize
where
    F: Fn(&[f64]) -> f64,
    E: Fn(&[Vec<f64>]) -> Vec<f64>,
{
    let n = s.points.len() - 1;
    let mut centroid = vec![0.0; n];
    for p in &s.points[..n] {
        for (c, v) in centroid.iter_mut().zip(p) {
            *c += v / n as f64;
        }
    }
    let worst = s.points[n].clone();
    let along = |t: f64| -> Vec<f64> {
        let mut x: Vec<f64> = centroid.iter().zip(&worst).map(|(c, w)| c + t * (c - w)).collect();
        spec.project(&mut x);
        x
    };
    let eval = |x: &[f64]| sanitize(f(x));

    let xr = along(1.0);
    let fr = eval(&xr);
    if fr < s.values[0] {
        let xe = along(2.0);
        let fe = eval(&xe);
        if fe < fr {
            replace_worst(s, xe, fe);
        } else {
            replace_worst(s, xr, fr);
        }
        return 2;
    }
    if fr < s.values[n - 1] {
        replace_worst(s, xr, fr);
        return 1;
    }
    if fr < s.values[n] {
        let xc = along(0.5);
        let fc = eval(&xc);
        if fc <= fr {
            replace_worst(s, xc, fc);
            return 2;
        }
    } else {
        let xcc = along(-0.5);
        let fcc = eval(&xcc);
        if fcc < s.values[n] {
            replace_worst(s, xcc, fcc);
            return 2;
        }
    }
    let best = s.points[0].clone();
    for p in &mut s.points[1..] {
        for (v, b) in p.iter_mut().zip(&best) {
            *v = b + 0.5 * (*v - b);
        }
        spec.project(p);
    }
    let values = eval_many(&s.points[1..]);
    s.values[1..].copy_from_slice(&values);
    2 + n
}

fn replace_worst(s: &mut Simplex, x: Vec<f64>, fx: f64) {
    let n = s.points.len() - 1;
    s.points[n] = x;
    s.values[n] = fx;
}
