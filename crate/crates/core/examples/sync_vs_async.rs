//! Majority dynamics on one noisy field under synchronous and random-order
//! asynchronous updates.
//!
//! cargo run --release --example sync_vs_async

use sensor_consensus::dynamics::{run, AsyncOrder, DynamicsRule, UpdateSchedule};
use sensor_consensus::field::random_linear_target;
use sensor_consensus::graph::build_graph;
use sensor_consensus::{Result, SensorField};

fn main() -> Result<()> {
    let field = SensorField::generate(10_000, random_linear_target(2, 1)?, 2)?;
    let graph = build_graph(field.positions(), 0.1)?;
    let noisy = field.corrupt_random(0.35, 3)?;
    let schedules = [
        ("synchronous", UpdateSchedule::Synchronous),
        (
            "random order",
            UpdateSchedule::Asynchronous(AsyncOrder::RandomPermutationPerRound { seed: 4 }),
        ),
    ];
    for (name, schedule) in schedules {
        let tr = run(&noisy, &graph, DynamicsRule::Majority, &schedule, 20)?;
        let shown: Vec<String> = tr.noise_rates.iter().take(6).map(|n| format!("{n:.4}")).collect();
        println!("{name:>12}: {} ... final {:.4}", shown.join(" "), tr.final_noise());
    }
    Ok(())
}
