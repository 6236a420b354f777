//! Kernel active learning of a sine-shaped boundary after denoising pocket
//! noise.
//!
//! cargo run --release --example kernel_sine

use sensor_consensus::dynamics::{run, DynamicsRule, UpdateSchedule};
use sensor_consensus::graph::build_graph;
use sensor_consensus::learner::kernel::kernel_active_learn;
use sensor_consensus::learner::{ActiveConfig, KernelSpec, LabelOracle};
use sensor_consensus::metrics::empirical_error;
use sensor_consensus::{Result, SensorField, TargetConcept};

fn main() -> Result<()> {
    let target = TargetConcept::default_sine();
    let field = SensorField::generate(10_000, target.clone(), 31)?;
    let graph = build_graph(field.positions(), 0.1)?;
    let noisy = field.corrupt_pockets(&graph, 0.15, 32)?;
    let tr = run(&noisy, &graph, DynamicsRule::Majority, &UpdateSchedule::Synchronous, 100)?;
    let denoised = noisy.with_labels(tr.final_labels)?;
    println!("noise {:.4} -> {:.4}", noisy.noise_rate(), denoised.noise_rate());

    let kernel = KernelSpec::gaussian(0.1)?;
    for budget in [10, 30, 60] {
        let config = ActiveConfig::for_budget(2, budget)?;
        let mut oracle = LabelOracle::new(denoised.current_labels(), budget);
        let h = kernel_active_learn(&mut oracle, denoised.positions(), &config, kernel, 33)?;
        let err = empirical_error(&h, &target, 10_000, 34)?;
        println!("budget {budget:>2}: {} support points, error {err:.4}", h.support_points().len());
    }
    Ok(())
}
