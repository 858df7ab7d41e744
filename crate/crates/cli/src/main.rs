//! `cellforge`: scenario generation, motion planning, planner metrics and
//! composition search from the command line.

mod commands;
mod config;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "cellforge", version, about = "Work-cell planning and robot composition search")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Master seed; falls back to the config file, then 0.
    #[arg(long, global = true, env = "CELLFORGE_SEED")]
    seed: Option<u64>,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random palletization scenario.
    GenScenario(commands::GenScenarioArgs),
    /// Plan the motion of one composition through a scenario.
    Plan(commands::PlanArgs),
    /// Run a planner benchmarking campaign.
    Metrics(commands::MetricsArgs),
    /// Search the best composition of a module library for a scenario.
    Optimize(commands::OptimizeArgs),
}

/// Resolved global settings shared by every command.
pub struct RunContext {
    pub seed: u64,
    pub config: RunConfig,
    pub out: PathBuf,
}

pub enum Outcome {
    Done,
    Infeasible,
}

fn setup(g: GlobalArgs) -> Result<RunContext> {
    let mut config = match &g.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if g.jobs.is_some() {
        config.jobs = g.jobs;
    }
    if g.out.is_some() {
        config.out = g.out;
    }
    config.validate()?;
    if let Some(jobs) = config.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let seed = g.seed.or(config.master_seed).unwrap_or(0);
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("."));
    Ok(RunContext { seed, config, out })
}

fn run(cli: Cli) -> Result<Outcome> {
    let ctx = setup(cli.global)?;
    match cli.command {
        Command::GenScenario(a) => commands::gen_scenario(&ctx, a),
        Command::Plan(a) => commands::plan(&ctx, a),
        Command::Metrics(a) => commands::metrics(&ctx, a),
        Command::Optimize(a) => commands::optimize(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
