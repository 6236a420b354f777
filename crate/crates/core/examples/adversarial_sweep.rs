//! On a line, updating sensors in ascending order of position lets the
//! negative side sweep across and overwrite every positive label.
//!
//! cargo run --release --example adversarial_sweep

use sensor_consensus::dynamics::{run, AsyncOrder, DynamicsRule, UpdateSchedule};
use sensor_consensus::field::random_linear_target;
use sensor_consensus::graph::build_graph;
use sensor_consensus::{Label, Result, SensorField};

fn main() -> Result<()> {
    let field = SensorField::generate(20_000, random_linear_target(1, 5)?, 6)?;
    let graph = build_graph(field.positions(), 0.1)?;
    let noisy = field.corrupt_random(0.25, 7)?;
    let sweep = UpdateSchedule::Asynchronous(AsyncOrder::AdversarialSweep);
    let tr = run(&noisy, &graph, DynamicsRule::Majority, &sweep, 1)?;
    let negative = tr.final_labels.iter().filter(|&&l| l == Label::Negative).count();
    println!("noise {:.4} -> {:.4}", tr.initial_noise(), tr.final_noise());
    println!("{negative} of {} sensors negative after one sweep", field.len());
    Ok(())
}
