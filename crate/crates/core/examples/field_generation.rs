//! Generate a sensor field, corrupt it two ways and inspect the graph.
//!
//! cargo run --release --example field_generation

use sensor_consensus::field::random_linear_target;
use sensor_consensus::graph::build_graph;
use sensor_consensus::{Result, SensorField};

fn main() -> Result<()> {
    let target = random_linear_target(2, 7)?;
    let field = SensorField::generate(10_000, target, 8)?;
    let graph = build_graph(field.positions(), 0.1)?;
    let mean_degree = 2.0 * graph.edge_count() as f64 / graph.len() as f64;
    println!("{} sensors, {} edges, mean degree {mean_degree:.1}", graph.len(), graph.edge_count());

    let random = field.corrupt_random(0.35, 9)?;
    println!("random noise at 0.35: {:.4} of labels wrong", random.noise_rate());
    let pockets = field.corrupt_pockets(&graph, 0.15, 9)?;
    println!("pocket noise at 0.15: {:.4} of labels wrong", pockets.noise_rate());
    Ok(())
}
