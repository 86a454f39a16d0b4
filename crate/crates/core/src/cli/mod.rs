// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: configuration, sweeps and the acceptance checks.

pub mod config;
pub mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{load_config, parse_config, preset, AxisName, Quantity, SweepConfig, PRESETS};
pub use run::{run_sweep, SweepOutcome};

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CROSS_CHECK: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("geometric routes disagree at {0} point(s)")]
    CrossCheck(usize),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::CrossCheck(_) => EXIT_CROSS_CHECK,
            CliError::Io(_) | CliError::Model(_) => EXIT_OTHER,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "geofcs",
    version,
    about = "Counting statistics of a driven two-bath boson site"
)]
pub struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Overrides the seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory; overrides `[output] path`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluates a configuration without axes and prints the report as JSON.
    Point {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs the sweep described by a configuration file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs a frozen preset.
    Preset { name: String },
    /// Runs the acceptance checks and prints one line per criterion.
    Verify,
}

fn with_overrides(mut sweeps: Vec<SweepConfig>, cli: &Cli) -> Vec<SweepConfig> {
    for s in &mut sweeps {
        if let Some(seed) = cli.seed {
            s.seed = seed;
        }
        if let Some(out) = &cli.out {
            s.output_path = out.clone();
        }
    }
    sweeps
}

/// Runs every sweep; route disagreement is reported after all outputs are
/// written.
pub fn run_all(sweeps: &[SweepConfig]) -> Result<Vec<SweepOutcome>, CliError> {
    let mut outcomes = Vec::with_capacity(sweeps.len());
    for s in sweeps {
        outcomes.push(run_sweep(s, &s.output_path)?);
    }
    let failures: usize = outcomes.iter().map(|o| o.cross_check_failures).sum();
    if failures > 0 {
        return Err(CliError::CrossCheck(failures));
    }
    Ok(outcomes)
}

/// Executes a parsed command line and returns the exit code.
pub fn execute(cli: Cli) -> Result<u8, CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    match &cli.command {
        Command::Point { config } => {
            let sweeps = with_overrides(load_config(config)?, &cli);
            let [sweep] = &sweeps[..] else {
                return Err(CliError::Validation("`point` takes a single configuration".into()));
            };
            if !sweep.axes.is_empty() {
                return Err(CliError::Validation(
                    "`point` takes a configuration without axes".into(),
                ));
            }
            let report = crate::report::CumulantReport::evaluate(&sweep.params, &sweep.numerics)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
            println!("{json}");
            if report.routes_agree() {
                Ok(EXIT_OK)
            } else {
                Err(CliError::CrossCheck(1))
            }
        }
        Command::Sweep { config } => {
            let sweeps = with_overrides(load_config(config)?, &cli);
            print_outcomes(&run_all(&sweeps)?);
            Ok(EXIT_OK)
        }
        Command::Preset { name } => {
            let raw = config::RawConfig {
                preset: Some(name.clone()),
                ..Default::default()
            };
            let sweeps = with_overrides(config::resolve(raw)?, &cli);
            print_outcomes(&run_all(&sweeps)?);
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let outcomes = crate::verify::run_all();
            for o in &outcomes {
                println!("{o}");
            }
            Ok(if outcomes.iter().all(|o| o.passed) {
                EXIT_OK
            } else {
                EXIT_OTHER
            })
        }
    }
}

fn print_outcomes(outcomes: &[SweepOutcome]) {
    for o in outcomes {
        for f in &o.files {
            println!("{}", f.display());
        }
    }
}
