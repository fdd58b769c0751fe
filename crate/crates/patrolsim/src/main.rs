use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use patrolsim::app::{execute, Command, Invocation};
use patrolsim::config::{DATA_DIR_ENV, SyntheticLayout, SyntheticSource};
use patrolsim::ingest::{synthetic_city, write_synthetic_files};
use patrolsim::CliError;
use patrolsim_core::incident::City;

#[derive(Parser)]
#[command(name = "patrolsim", version, about = "Simulate GAN-directed patrol allocation and audit detection disparities")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment plan (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Parallel month-runs.
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
    /// Master seed; overrides the plan.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the plan.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Demo,
    TwoCluster,
}

#[derive(Subcommand)]
enum Sub {
    /// Parse and filter the plan's datasets and report counts.
    Ingest(RunArgs),
    /// Run every (cell, month, replicate) and write monthly/annual CSVs.
    Grid(RunArgs),
    /// Run the parameter sweeps.
    Sensitivity(RunArgs),
    /// Run the rebalancing experiment.
    Debias(RunArgs),
    /// Regression and correlations over neighborhood detection rates.
    Stats(RunArgs),
    /// Draw SVG charts from the grid outputs.
    Plots(RunArgs),
    /// grid, sensitivity, debias, stats and plots in one go.
    All(RunArgs),
    /// Write a synthetic city as crime, boundary and demographic files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "demo")]
        layout: Layout,
        #[arg(long, default_value = "Baltimore", value_parser = parse_city)]
        city: City,
        #[arg(long, default_value_t = 2019)]
        year: i32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        incidents_per_month: usize,
        /// Share of incidents in the White-majority cluster (two-cluster).
        #[arg(long, default_value_t = 0.75)]
        white_share: f64,
    },
}

fn parse_city(s: &str) -> Result<City, String> {
    City::parse(s).ok_or_else(|| format!("unknown city {s:?}"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (command, args) = match cli.command {
        Sub::Ingest(a) => (Command::Ingest, a),
        Sub::Grid(a) => (Command::Grid, a),
        Sub::Sensitivity(a) => (Command::Sensitivity, a),
        Sub::Debias(a) => (Command::Debias, a),
        Sub::Stats(a) => (Command::Stats, a),
        Sub::Plots(a) => (Command::Plots, a),
        Sub::All(a) => (Command::All, a),
        Sub::Synth { out, layout, city, year, seed, incidents_per_month, white_share } => {
            let layout = match layout {
                Layout::Demo => SyntheticLayout::Demo,
                Layout::TwoCluster => SyntheticLayout::TwoCluster,
            };
            let source = SyntheticSource { layout, seed, incidents_per_month, white_share };
            let files = write_synthetic_files(&synthetic_city(city, year, &source), &out)?;
            for f in files {
                println!("{}", f.display());
            }
            return Ok(());
        }
    };
    let inv = Invocation { command, config: args.config, jobs: args.jobs, seed: args.seed, out: args.out };
    execute(&inv, std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
