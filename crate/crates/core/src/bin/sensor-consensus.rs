use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sensor_consensus::harness::{cmd_denoise, cmd_learn, cmd_plot, cmd_sweep, ExperimentConfig};
use sensor_consensus::{Error, Result};

/// Denoise sensor labels with local best-response dynamics, then learn the
/// boundary from a few queries.
#[derive(Parser)]
#[command(name = "sensor-consensus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Noise-rate trajectories over a grid of initial noise levels.
    Denoise(RunArgs),
    /// Learning curves: active/passive, before/after denoising.
    Learn(RunArgs),
    /// Learning curves across a grid of sensor counts or radii.
    Sweep(RunArgs),
    /// SVG plots of harness CSVs.
    Plot(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Defaults to `output_dir` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    out: PathBuf,
    /// Accepted for symmetry with the other commands; unused.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(required = true)]
    csv: Vec<PathBuf>,
}

fn load(args: &RunArgs) -> Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| Error::Config("no --out given and no output_dir in config".into()))?;
    Ok((cfg, out))
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Denoise(a) => {
            let (cfg, out) = load(&a)?;
            cmd_denoise(&cfg, &out)
        }
        Command::Learn(a) => {
            let (cfg, out) = load(&a)?;
            cmd_learn(&cfg, &out)
        }
        Command::Sweep(a) => {
            let (cfg, out) = load(&a)?;
            cmd_sweep(&cfg, &out)
        }
        Command::Plot(a) => cmd_plot(&a.csv, &a.out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_configuration() { 1 } else { 2 })
        }
    }
}
