//! Configuration files, data files and the command implementations behind
//! the `sst` binary.

pub mod commands;
pub mod config;
pub mod data;

pub use commands::{CommandOutput, FittedParams};
pub use config::{BatchConfig, InitialConditions, OutputConfig, RunConfig, ScenarioSpec};
pub use data::{read_batch_curve, read_steady_data, read_table, write_batch_curve, write_steady_data, write_table, Table};
