//! The conservative rule under the same adversarial order: sensors only move
//! when every balanced split through them agrees, so no correct label is lost.
//!
//! cargo run --release --example conservative_dynamics

use sensor_consensus::dynamics::{run, AsyncOrder, DynamicsRule, UpdateSchedule};
use sensor_consensus::field::random_linear_target;
use sensor_consensus::graph::build_graph;
use sensor_consensus::{Result, SensorField};

fn main() -> Result<()> {
    let field = SensorField::generate(50_000, random_linear_target(2, 3)?, 4)?;
    let graph = build_graph(field.positions(), 0.05)?;
    let noisy = field.corrupt_random(0.25, 5)?;
    let sweep = UpdateSchedule::Asynchronous(AsyncOrder::AdversarialSweep);
    for (name, rule) in [("majority", DynamicsRule::Majority), ("conservative", DynamicsRule::conservative())] {
        let tr = run(&noisy, &graph, rule, &sweep, 1)?;
        println!(
            "{name:>12}: noise {:.4} -> {:.4}, {} flips, {} of them wrong",
            tr.initial_noise(),
            tr.final_noise(),
            tr.flips.iter().sum::<usize>(),
            tr.total_wrong_flips()
        );
    }
    Ok(())
}
