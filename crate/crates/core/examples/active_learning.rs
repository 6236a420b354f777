//! Denoise, then spend 30 label queries with the margin-based active learner
//! and with a passive SVM.
//!
//! cargo run --release --example active_learning

use sensor_consensus::dynamics::{run, DynamicsRule, UpdateSchedule};
use sensor_consensus::field::random_linear_target;
use sensor_consensus::graph::build_graph;
use sensor_consensus::learner::linear::active_learn;
use sensor_consensus::learner::passive::{passive_baseline, PassiveModel, DEFAULT_REG_GRID};
use sensor_consensus::learner::{ActiveConfig, Hypothesis, LabelOracle};
use sensor_consensus::metrics::{angle_radians, empirical_error};
use sensor_consensus::{Result, SensorField};

fn main() -> Result<()> {
    let target = random_linear_target(2, 21)?;
    let field = SensorField::generate(10_000, target.clone(), 22)?;
    let graph = build_graph(field.positions(), 0.1)?;
    let noisy = field.corrupt_random(0.35, 23)?;
    let tr = run(&noisy, &graph, DynamicsRule::Majority, &UpdateSchedule::Synchronous, 100)?;
    let denoised = noisy.with_labels(tr.final_labels)?;
    println!("noise {:.4} -> {:.4}", noisy.noise_rate(), denoised.noise_rate());

    let budget = 30;
    let config = ActiveConfig::for_budget(2, budget)?;
    let mut oracle = LabelOracle::new(denoised.current_labels(), budget);
    let active = active_learn(&mut oracle, denoised.positions(), &config, 24)?;
    let error = angle_radians(&active, &target)? / std::f64::consts::PI;
    println!("active: {} labels, error {error:.4}", oracle.queries_made());

    let mut oracle = LabelOracle::new(denoised.current_labels(), budget);
    let score = |h: &Hypothesis| empirical_error(h, &target, 10_000, 25).unwrap_or(1.0);
    let passive = passive_baseline(
        &mut oracle,
        denoised.positions(),
        budget,
        &DEFAULT_REG_GRID,
        PassiveModel::Linear,
        &score,
        26,
    )?;
    println!("passive: {} labels, error {:.4}", oracle.queries_made(), score(&passive));
    Ok(())
}
