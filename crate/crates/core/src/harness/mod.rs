//! Experiment harness: configuration, seeded parallel trials, CSV output and
//! SVG plots. The `sensor-consensus` binary is a thin shell over this module.

pub mod config;
pub mod experiments;
pub mod plot;

pub use config::{ExperimentConfig, LearnerKind, NoiseModel, ScheduleKind, SweepParam, TargetKind};
pub use experiments::{
    cmd_denoise, cmd_learn, cmd_sweep, denoise, learn, sweep, Condition, DenoiseReport,
    LearnRecord, LearnReport, SweepReport,
};
pub use plot::cmd_plot;
