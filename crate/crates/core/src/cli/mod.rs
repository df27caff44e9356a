// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: `paramp <task> --config FILE --out DIR`.

pub mod config;
pub mod output;
pub mod tasks;

use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::error::{ParampError, Result};
use config::ExperimentConfig;
use output::OutputDir;
use tasks::Results;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Scatter,
    GainSweep,
    PoutSweep,
    ThresholdSweep,
    Wigner,
    Mc,
    CircuitParams,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Scatter => "scatter",
            Task::GainSweep => "gain-sweep",
            Task::PoutSweep => "pout-sweep",
            Task::ThresholdSweep => "threshold-sweep",
            Task::Wigner => "wigner",
            Task::Mc => "mc",
            Task::CircuitParams => "circuit-params",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "paramp", version, about = "Josephson parametric amplifier calculations")]
pub struct Args {
    pub task: Task,
    /// TOML experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `[numerics] seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    pub print_config: bool,
}

/// Loads the configuration and applies command-line overrides.
pub fn load(args: &Args) -> Result<ExperimentConfig> {
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| ParampError::Io(format!("{}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&raw)?;
    if let Some(name) = &cfg.task.name {
        if name != args.task.name() {
            return Err(ParampError::Config(format!(
                "[task] name is {name:?} but the command line asks for {:?}",
                args.task.name()
            )));
        }
    }
    if let Some(seed) = args.seed {
        cfg.numerics.seed = seed;
    }
    Ok(cfg)
}

/// Runs one task. Partial results and the manifest are written before a
/// [`ParampError::PartialFailure`] is returned.
pub fn run(args: &Args) -> Result<()> {
    let cfg = load(args)?;
    if args.print_config {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let dir = args
        .out
        .as_ref()
        .ok_or_else(|| ParampError::Config("--out is required unless --print-config is given".into()))?;
    let model = cfg.amplifier_model()?;
    let mut out = OutputDir::create(dir)?;
    let mut results = Results::new();
    let run = match args.task {
        Task::Scatter => tasks::scatter,
        Task::GainSweep => tasks::gain_sweep_task,
        Task::PoutSweep => tasks::pout_sweep,
        Task::ThresholdSweep => tasks::threshold_sweep,
        Task::Wigner => tasks::wigner,
        Task::Mc => tasks::mc,
        Task::CircuitParams => tasks::circuit_params,
    };
    let tally = run(&cfg, &model, &mut out, &mut results)?;
    results.insert("points_total".into(), tally.total as f64);
    results.insert("points_failed".into(), tally.failed as f64);
    out.write_manifest(args.task.name(), &cfg.hash(), cfg.numerics.seed, &results)?;
    log::info!("{}: {} points, {} failed", args.task.name(), tally.total, tally.failed);
    tasks::check(tally)
}

/// Process entry point; returns the exit code.
pub fn main_entry() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("paramp: {e}");
            e.exit_code()
        }
    }
}
