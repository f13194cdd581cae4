//! The work behind each command-line subcommand.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asm1::{Particulates, Solubles};
use crate::calibration::{
    self, fit_dispersion, fit_settling, profile_error, sample_state, DispersionFitOptions, DispersionMode,
    SteadyDataPoint,
};
use crate::constitutive::{tss_unchecked, DispersionParams, SettlingModel, SettlingParams};
use crate::error::{Error, Result};
use crate::induction::{self, BatchCurve, InductionFit};
use crate::solver::{batch_simulate, BatchOptions, SimulationState, Simulator};

use super::config::{RunConfig, ScenarioSpec};
use super::data::{self, component_names, read_batch_curve, read_steady_data, write_batch_curve, write_table, Table};

/// Files written by a command and a one-paragraph summary for the terminal.
#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

impl CommandOutput {
    fn add(&mut self, path: PathBuf) {
        self.files.push(path);
    }
}

/// Parameters produced by the calibration commands. Extra tables (such as
/// fit reports) are ignored when reading.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FittedParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settling: Option<SettlingParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<DispersionParams>,
}

impl FittedParams {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let p: FittedParams = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.span().map(|s| text[..s.start].matches('\n').count() as u64 + 1),
            message: e.message().to_string(),
        })?;
        if let Some(s) = &p.settling {
            s.validate()?;
        }
        if let Some(d) = &p.dispersion {
            d.validate()?;
        }
        Ok(p)
    }

    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.settling {
            cfg.settling = s;
        }
        if let Some(d) = self.dispersion {
            cfg.dispersion = d;
        }
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_toml<T: Serialize>(value: &T) -> Result<String> {
    toml::to_string_pretty(value).map_err(|e| Error::invalid("output", e.to_string()))
}

fn echo_config(cfg: &RunConfig, out: &Path, result: &mut CommandOutput) -> Result<()> {
    let path = out.join("resolved_config.toml");
    write_text(&path, &cfg.resolved_toml()?)?;
    result.add(path);
    Ok(())
}

/// Total nitrogen `X_ND + S_NO + S_NH + S_ND` [g N/m³].
pub fn total_nitrogen(c: &[f64; 6], s: &[f64; 7]) -> f64 {
    c[Particulates::X_ND] + s[Solubles::S_NO] + s[Solubles::S_NH] + s[Solubles::S_ND]
}

/// One row per stored layer: depth, all components, TSS and total nitrogen.
pub fn profile_table(sim: &Simulator, state: &SimulationState) -> Table {
    let mut headers = vec!["z_m"];
    headers.extend(component_names());
    headers.extend(["tss", "total_n"]);
    let mut t = Table::new(&headers).with_meta("t_h", data::format_float(state.t));
    for j in 0..state.cells() {
        let mut row = vec![sim.grid.z_centers[j]];
        row.extend(state.c[j]);
        row.extend(state.s[j]);
        row.push(tss_unchecked(&state.c[j]));
        row.push(total_nitrogen(&state.c[j], &state.s[j]));
        t.push(row);
    }
    t
}

fn timeseries_table(sim: &Simulator, snapshots: &[SimulationState], threshold: f64) -> Result<Table> {
    let names = component_names();
    let mut headers: Vec<String> = ["t_h", "sbl_z_m", "tss_effluent", "tss_underflow"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    headers.extend(names.iter().map(|n| format!("effluent_{n}")));
    headers.extend(names.iter().map(|n| format!("underflow_{n}")));
    let mut t = Table {
        headers,
        ..Default::default()
    };
    for s in snapshots {
        let (ce, se) = s.effluent();
        let (cu, su) = s.underflow();
        let mut row = vec![
            s.t,
            sim.sludge_blanket(s, threshold)?,
            tss_unchecked(&ce.0),
            tss_unchecked(&cu.0),
        ];
        row.extend(ce.0);
        row.extend(se.0);
        row.extend(cu.0);
        row.extend(su.0);
        t.push(row);
    }
    Ok(t)
}

/// Run the configured scenario and write profiles and time series.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    cfg.validate()?;
    let mut result = CommandOutput::default();
    echo_config(cfg, out, &mut result)?;
    let mut sim = cfg.simulator()?;
    if sim.options.output_stride == 0 {
        sim.options.output_stride = 1000;
    }
    let state0 = cfg.initial_state(&sim);
    let run = sim.run(&state0)?;

    let path = out.join("final_profile.csv");
    write_table(&path, &profile_table(&sim, &run.final_state))?;
    result.add(path);

    let mut all = Table::default();
    for snap in &run.snapshots {
        let t = profile_table(&sim, snap);
        if all.headers.is_empty() {
            all.headers = std::iter::once("t_h".to_string()).chain(t.headers).collect();
        }
        for row in t.rows {
            all.push(std::iter::once(snap.t).chain(row).collect());
        }
    }
    let path = out.join("profiles.csv");
    write_table(&path, &all)?;
    result.add(path);

    let path = out.join("timeseries.csv");
    write_table(&path, &timeseries_table(&sim, &run.snapshots, cfg.output.sbl_threshold)?)?;
    result.add(path);

    let fin = &run.final_state;
    result.summary = format!(
        "scenario {}: t = {:.3} h after {} steps ({}), effluent TSS {:.3} g/m³, underflow TSS {:.1} g/m³, blanket at z = {:.3} m",
        sim.scenario.label,
        fin.t,
        run.steps,
        if run.steady { "steady" } else { "not steady" },
        tss_unchecked(&fin.c[0]),
        tss_unchecked(&fin.c[fin.cells() - 1]),
        sim.sludge_blanket(fin, cfg.output.sbl_threshold)?,
    );
    Ok(result)
}

fn batch_file_name(x_init: f64) -> String {
    format!("batch_x{x_init:.2}.csv")
}

/// Simulate the configured batch tests and write one curve per test.
pub fn batch(cfg: &RunConfig, out: &Path) -> Result<CommandOutput> {
    cfg.validate()?;
    let mut result = CommandOutput::default();
    echo_config(cfg, out, &mut result)?;
    let model = SettlingModel::new(cfg.settling)?;
    let times = cfg.batch.sample_times();
    let curves = cfg
        .batch
        .x_init
        .par_iter()
        .map(|&x| {
            let r = batch_simulate(x, &times, &model, &cfg.batch.options)?;
            Ok(BatchCurve {
                times: times.clone(),
                sbl: r.sbl,
                x_init: x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    for c in &curves {
        let path = out.join(batch_file_name(c.x_init));
        write_batch_curve(&path, c)?;
        result.add(path);
    }
    result.summary = format!("{} batch curves over {} h", curves.len(), cfg.batch.t_end);
    Ok(result)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "curve".into())
}

/// Remove the induction period from measured batch curves.
pub fn transform(inputs: &[PathBuf], out: &Path) -> Result<CommandOutput> {
    if inputs.is_empty() {
        return Err(Error::invalid("transform", "no input files"));
    }
    let mut result = CommandOutput::default();
    let curves = inputs.iter().map(|p| read_batch_curve(p)).collect::<Result<Vec<_>>>()?;
    let fits = curves
        .par_iter()
        .map(induction::remove_induction)
        .collect::<Result<Vec<(InductionFit, BatchCurve)>>>()?;
    let mut table = Table::new(&["x_init_kg_m3", "v_settle_m_h", "t_bar_h", "p_exp", "t_induction_end_h"]);
    for (input, (fit, tau)) in inputs.iter().zip(&fits) {
        let path = out.join(format!("{}_tau.csv", stem(input)));
        let mut t = data::batch_curve_table(tau);
        t.meta.insert("time_axis".into(), "effective".into());
        write_table(&path, &t)?;
        result.add(path);
        table.push(vec![tau.x_init, fit.v_settle, fit.t_bar, fit.p_exp, fit.t_induction_end]);
    }
    let path = out.join("induction_fits.csv");
    write_table(&path, &table)?;
    result.add(path);
    result.summary = format!("removed the induction period from {} curves", fits.len());
    Ok(result)
}

#[derive(Serialize)]
struct SettlingReport<'a> {
    settling: &'a SettlingParams,
    report: SettlingReportBody,
}

#[derive(Serialize)]
struct SettlingReportBody {
    sse: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    curves: usize,
    trace: Vec<f64>,
}

/// Calibrate the settling parameters on batch curves.
pub fn fit_settling_command(
    cfg: &RunConfig,
    inputs: &[PathBuf],
    remove_induction: bool,
    max_iterations: usize,
    out: &Path,
) -> Result<CommandOutput> {
    cfg.validate()?;
    if inputs.is_empty() {
        return Err(Error::invalid("fit-settling", "no input files"));
    }
    let mut result = CommandOutput::default();
    echo_config(cfg, out, &mut result)?;
    let mut curves = inputs.iter().map(|p| read_batch_curve(p)).collect::<Result<Vec<_>>>()?;
    if remove_induction {
        curves = curves
            .iter()
            .map(|c| induction::remove_induction(c).map(|(_, tau)| tau))
            .collect::<Result<Vec<_>>>()?;
    }
    let opts = cfg.batch.options;
    let fit = fit_settling(&curves, &cfg.settling, &opts, max_iterations)?;
    let report = SettlingReport {
        settling: &fit.params,
        report: SettlingReportBody {
            sse: fit.sse,
            iterations: fit.optimizer.iterations,
            evaluations: fit.optimizer.evaluations,
            converged: fit.optimizer.converged,
            curves: curves.len(),
            trace: fit.optimizer.trace.clone(),
        },
    };
    let path = out.join("settling_fit.toml");
    write_text(&path, &to_toml(&report)?)?;
    result.add(path);

    let model = SettlingModel::new(fit.params)?;
    let mut residuals = Table::new(&["curve", "x_init_kg_m3", "time_h", "sbl_data_m", "sbl_model_m", "residual_m"]);
    for (i, c) in curves.iter().enumerate() {
        let o = BatchOptions {
            column_height: c.sbl[0],
            ..opts
        };
        let sim = batch_simulate(c.x_init, &c.times, &model, &o)?;
        for ((t, d), m) in c.times.iter().zip(&c.sbl).zip(&sim.sbl) {
            residuals.push(vec![i as f64, c.x_init, *t, *d, *m, m - d]);
        }
    }
    let path = out.join("settling_residuals.csv");
    write_table(&path, &residuals)?;
    result.add(path);
    let p = fit.params;
    result.summary = format!(
        "v0 = {:.6} m/h, xbar = {:.6} kg/m³, eta = {:.6}, alpha = {:.3} m²/h² (SSE {:.3e}, {} iterations)",
        p.v0, p.xbar, p.eta, p.alpha, fit.sse, fit.optimizer.iterations
    );
    Ok(result)
}

#[derive(Serialize)]
struct DispersionReport {
    dispersion: DispersionParams,
    report: DispersionReportBody,
}

#[derive(Serialize)]
struct DispersionReportBody {
    mode: DispersionMode,
    value: f64,
    iterations: usize,
    evaluations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn comparison_table(sim: &Simulator, state: &SimulationState, data: &[SteadyDataPoint]) -> Table {
    let mut t = Table::new(&[
        "z_m",
        "tss_data",
        "tss_model",
        "cod_data",
        "cod_model",
        "s_o_data",
        "s_o_model",
        "s_no_data",
        "s_no_model",
        "s_nh_data",
        "s_nh_model",
    ]);
    for d in data {
        let m = sample_state(sim, state, d.z);
        t.push(vec![
            d.z, d.tss, m.tss, d.cod, m.cod, d.s_o, m.s_o, d.s_no, m.s_no, d.s_nh, m.s_nh,
        ]);
    }
    t
}

/// Calibrate the dispersion parameters on a steady-state profile.
pub fn fit_dispersion_command(
    cfg: &RunConfig,
    data_path: &Path,
    mode: DispersionMode,
    max_iterations: usize,
    out: &Path,
) -> Result<CommandOutput> {
    cfg.validate()?;
    let mut result = CommandOutput::default();
    echo_config(cfg, out, &mut result)?;
    let data = read_steady_data(data_path)?;
    let sim = cfg.simulator()?;
    calibration::validate_data(&data, &sim).map_err(|e| Error::Parse {
        path: data_path.to_path_buf(),
        line: None,
        message: e.to_string(),
    })?;
    let opts = DispersionFitOptions {
        mode,
        max_iterations,
        ..Default::default()
    };
    let fit = fit_dispersion(&sim, &data, &cfg.initial_state(&sim), &opts)?;
    let report = DispersionReport {
        dispersion: fit.params,
        report: DispersionReportBody {
            mode,
            value: fit.value,
            iterations: fit.optimizer.iterations,
            evaluations: fit.optimizer.evaluations,
            converged: fit.optimizer.converged,
            trace: fit.optimizer.trace.clone(),
        },
    };
    let path = out.join("dispersion_fit.toml");
    write_text(&path, &to_toml(&report)?)?;
    result.add(path);

    let mut evals = Table::new(&["evaluation", "d_x", "d_l", "alpha1", "alpha2", "value", "seed"]);
    for (i, r) in fit.evaluations.iter().enumerate() {
        let p = mode.params(&r.params).as_array();
        let seed = r.seed.map(|s| s as f64).unwrap_or(-1.0);
        evals.push(vec![i as f64, p[0], p[1], p[2], p[3], r.value, seed]);
    }
    let path = out.join("dispersion_evaluations.csv");
    write_table(&path, &evals)?;
    result.add(path);

    let fitted = Simulator {
        dispersion: fit.params,
        ..sim
    };
    let path = out.join("dispersion_comparison.csv");
    write_table(&path, &comparison_table(&fitted, &fit.state, &data))?;
    result.add(path);
    let p = fit.params.as_array();
    result.summary = format!(
        "d_x = {:.6} m, d_l = {:.6} m, alpha1 = {:.6} 1/m, alpha2 = {:.6} h/m² (error {:.4e}, {} iterations)",
        p[0], p[1], p[2], p[3], fit.value, fit.optimizer.iterations
    );
    Ok(result)
}

/// Simulate the three bundled scenarios to steady state and compare them
/// with measured profiles found in `data_dir` as `steady_<label>.csv`.
pub fn validate(cfg: &RunConfig, params: Option<&Path>, data_dir: Option<&Path>, out: &Path) -> Result<CommandOutput> {
    let mut cfg = cfg.clone();
    if let Some(p) = params {
        FittedParams::load(p)?.apply(&mut cfg);
    }
    cfg.validate()?;
    let mut result = CommandOutput::default();
    echo_config(&cfg, out, &mut result)?;
    let labels = ["L", "M", "H"];
    let runs = labels
        .par_iter()
        .map(|label| {
            let mut c = cfg.clone();
            c.scenario = ScenarioSpec::Bundled(label.to_string());
            let sim = c.simulator()?;
            let run = sim.run(&c.initial_state(&sim))?;
            Ok((sim, run))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut lines = Vec::new();
    for (label, (sim, run)) in labels.iter().zip(&runs) {
        let path = out.join(format!("validate_{label}_profile.csv"));
        write_table(&path, &profile_table(sim, &run.final_state))?;
        result.add(path);
        let mut line = format!(
            "{label}: {} after {:.1} h, underflow TSS {:.1} g/m³",
            if run.steady { "steady" } else { "not steady" },
            run.final_state.t,
            tss_unchecked(&run.final_state.c[run.final_state.cells() - 1])
        );
        if let Some(dir) = data_dir {
            let data_path = dir.join(format!("steady_{label}.csv"));
            if data_path.exists() {
                let data = read_steady_data(&data_path)?;
                let path = out.join(format!("validate_{label}_comparison.csv"));
                write_table(&path, &comparison_table(sim, &run.final_state, &data))?;
                result.add(path);
                line.push_str(&format!(", profile error {:.4}", profile_error(sim, &run.final_state, &data)));
            }
        }
        lines.push(line);
    }
    result.summary = lines.join("\n");
    Ok(result)
}
