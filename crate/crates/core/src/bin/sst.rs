use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use reactive_settling::calibration::DispersionMode;
use reactive_settling::io::commands::{self, CommandOutput};
use reactive_settling::io::RunConfig;
use reactive_settling::{Error, Result};

/// Simulate and calibrate a secondary settling tank with biological reactions.
#[derive(Parser, Debug)]
#[command(name = "sst", version)]
struct Cli {
    /// TOML configuration; defaults are used when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides SST_OUTPUT_DIR and the config).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the configured tank scenario.
    Simulate {
        /// Bundled scenario label, overriding the config.
        #[arg(long)]
        scenario: Option<String>,
        /// Final time [h].
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Simulate batch settling tests.
    Batch {
        /// Initial concentrations [kg/m³], overriding the config.
        #[arg(long, value_delimiter = ',')]
        x_init: Option<Vec<f64>>,
    },
    /// Remove the induction period from measured batch curves.
    Transform {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Calibrate the settling parameters on batch curves.
    FitSettling {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Remove the induction period before fitting.
        #[arg(long)]
        transform: bool,
        #[arg(long, default_value_t = 2000)]
        max_iterations: usize,
    },
    /// Calibrate the dispersion parameters on a steady-state profile.
    FitDispersion {
        data: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
        #[arg(long, default_value_t = 400)]
        max_iterations: usize,
    },
    /// Run the three bundled scenarios to steady state.
    Validate {
        /// Fitted parameter file with `[settling]` and/or `[dispersion]`.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Directory with measured profiles named `steady_<label>.csv`.
        #[arg(long)]
        data: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Full,
    Reduced,
}

fn output_dir(cli: &Cli, cfg: &RunConfig) -> PathBuf {
    cli.output
        .clone()
        .or_else(|| std::env::var_os("SST_OUTPUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.dir.clone())
}

fn run(cli: &Cli) -> Result<CommandOutput> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let out = output_dir(cli, &cfg);
    let out: &Path = &out;
    match &cli.command {
        Command::Simulate { scenario, t_end } => {
            if let Some(label) = scenario {
                cfg.scenario = reactive_settling::io::ScenarioSpec::Bundled(label.clone());
            }
            if let Some(t) = t_end {
                cfg.solver.t_end = *t;
            }
            commands::simulate(&cfg, out)
        }
        Command::Batch { x_init } => {
            if let Some(x) = x_init {
                cfg.batch.x_init = x.clone();
            }
            commands::batch(&cfg, out)
        }
        Command::Transform { inputs } => commands::transform(inputs, out),
        Command::FitSettling {
            inputs,
            transform,
            max_iterations,
        } => commands::fit_settling_command(&cfg, inputs, *transform, *max_iterations, out),
        Command::FitDispersion {
            data,
            mode,
            max_iterations,
        } => {
            let mode = match mode {
                Mode::Full => DispersionMode::Full,
                Mode::Reduced => DispersionMode::Reduced,
            };
            commands::fit_dispersion_command(&cfg, data, mode, *max_iterations, out)
        }
        Command::Validate { params, data } => commands::validate(&cfg, params.as_deref(), data.as_deref(), out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(result) => {
            println!("{}", result.summary);
            for f in &result.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
