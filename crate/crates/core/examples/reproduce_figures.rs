//! Denoising and learning curves at reduced trial counts, written as CSV and
//! SVG to the directory given as the first argument.
//!
//! cargo run --release --example reproduce_figures -- out/figures

use std::path::PathBuf;

use sensor_consensus::harness::{cmd_denoise, cmd_learn, cmd_plot, ExperimentConfig};
use sensor_consensus::Result;

fn main() -> Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "figures".into()));
    let cfg = ExperimentConfig {
        trials: 10,
        ..ExperimentConfig::default()
    };
    let mut csvs = cmd_denoise(&cfg, &out)?;
    csvs.extend(cmd_learn(&cfg, &out)?);
    for svg in cmd_plot(&csvs, &out)? {
        println!("{}", svg.display());
    }
    Ok(())
}
