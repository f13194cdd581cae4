//! Run configuration read from a TOML file.
//!
//! Every block is optional; missing values fall back to the calibrated
//! defaults. The fully resolved configuration can be written back so each
//! run records exactly what it used.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::asm1::{Asm1Params, Particulates, Solubles};
use crate::constitutive::{DispersionParams, SettlingParams};
use crate::error::{Error, Result};
use crate::geometry::TankConfig;
use crate::scenario::{self, Scenario};
use crate::solver::{BatchOptions, SimulationState, Simulator, SolverOptions};

/// Either the label of a bundled scenario (`"L"`, `"M"`, `"H"`) or a full
/// scenario table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSpec {
    Bundled(String),
    Custom(Scenario),
}

impl ScenarioSpec {
    pub fn resolve(&self) -> Result<Scenario> {
        match self {
            ScenarioSpec::Bundled(label) => scenario::bundled(label)
                .ok_or_else(|| Error::invalid("scenario", format!("unknown bundled scenario {label:?}"))),
            ScenarioSpec::Custom(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConditions {
    pub particulates: Particulates,
    pub solubles: Solubles,
}

impl Default for InitialConditions {
    fn default() -> Self {
        InitialConditions {
            particulates: scenario::initial_particulates(),
            solubles: scenario::initial_solubles(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    /// Initial concentrations [kg/m³], one batch test each.
    pub x_init: Vec<f64>,
    /// Duration of each test [h].
    pub t_end: f64,
    /// Sampling interval [h].
    pub sample_interval: f64,
    pub options: BatchOptions,
}

impl Default for BatchConfig {
    fn default() -> Self {
        BatchConfig {
            // 22 tests between 1.1 and 3.2 kg/m³
            x_init: (0..22).map(|i| ((1.1 + 0.1 * i as f64) * 10.0).round() / 10.0).collect(),
            t_end: 0.5,
            sample_interval: 1.0 / 60.0,
            options: BatchOptions::default(),
        }
    }
}

impl BatchConfig {
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_interval).round() as usize;
        (0..=n).map(|i| (i as f64 * self.sample_interval).min(self.t_end)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.options.validate()?;
        if !(self.t_end > 0.0 && self.sample_interval > 0.0 && self.sample_interval <= self.t_end) {
            return Err(Error::invalid("batch", "need 0 < sample_interval <= t_end"));
        }
        if self.x_init.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::invalid("batch", "x_init values must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Blanket threshold for continuous simulations [kg/m³].
    pub sbl_threshold: f64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("output"),
            sbl_threshold: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tank: TankConfig,
    pub settling: SettlingParams,
    pub dispersion: DispersionParams,
    pub asm1: Asm1Params,
    pub scenario: ScenarioSpec,
    pub initial: InitialConditions,
    pub solver: SolverOptions,
    pub batch: BatchConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tank: TankConfig::default(),
            settling: SettlingParams::default(),
            dispersion: DispersionParams::fitted(),
            asm1: Asm1Params::default(),
            scenario: ScenarioSpec::Bundled("M".into()),
            initial: InitialConditions::default(),
            solver: SolverOptions::default(),
            batch: BatchConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::parse(&text, path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() as u64 + 1);
            Error::Parse {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    /// Check every block before anything runs.
    pub fn validate(&self) -> Result<()> {
        self.tank.validate()?;
        self.settling.validate()?;
        self.dispersion.validate()?;
        self.asm1.validate()?;
        self.scenario.resolve()?.validate()?;
        self.solver.validate()?;
        self.batch.validate()?;
        if !(self.output.sbl_threshold > 0.0) {
            return Err(Error::invalid("output", "sbl_threshold must be positive"));
        }
        Ok(())
    }

    /// The configuration with the scenario expanded, as TOML.
    pub fn resolved_toml(&self) -> Result<String> {
        let mut cfg = self.clone();
        cfg.scenario = ScenarioSpec::Custom(self.scenario.resolve()?);
        toml::to_string_pretty(&cfg).map_err(|e| Error::invalid("config", e.to_string()))
    }

    pub fn simulator(&self) -> Result<Simulator> {
        Simulator::new(
            &self.tank,
            self.settling,
            self.dispersion,
            self.asm1,
            self.scenario.resolve()?,
            self.solver.clone(),
        )
    }

    pub fn initial_state(&self, sim: &Simulator) -> SimulationState {
        SimulationState::uniform(&sim.grid, self.initial.particulates, self.initial.solubles)
    }
}
