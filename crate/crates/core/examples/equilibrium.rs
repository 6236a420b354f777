//! How close the true labeling is to an equilibrium of the consensus game:
//! the largest payoff gain any single sensor could get by flipping.
//!
//! cargo run --release --example equilibrium

use sensor_consensus::field::random_linear_target;
use sensor_consensus::graph::{build_graph, max_deviation_incentive};
use sensor_consensus::{Result, SensorField};

fn main() -> Result<()> {
    for r in [0.05, 0.1, 0.2] {
        let field = SensorField::generate(50_000, random_linear_target(2, 11)?, 12)?;
        let graph = build_graph(field.positions(), r)?;
        let eps = max_deviation_incentive(&graph, field.true_labels())?;
        println!("r = {r:<4}: true labeling is a {eps:.3}-equilibrium");
    }
    Ok(())
}
