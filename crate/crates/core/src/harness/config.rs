//! Flat `key = value` experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::DynamicsRule;
use crate::error::{Error, Result};
use crate::field::TargetConcept;
use crate::learner::passive::DEFAULT_REG_GRID;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseModel {
    Random,
    Pockets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Synchronous,
    /// Fresh random permutation every round.
    Random,
    /// Ascending projection onto the target normal.
    Adversarial,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetKind {
    Linear,
    Sine { amplitude: f64, frequency: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LearnerKind {
    Linear,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Sensors,
    Radius,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Sensors => "n_sensors",
            SweepParam::Radius => "radius",
        })
    }
}

/// Everything an experiment command needs. Keys in the config file carry
/// the field names.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_sensors: usize,
    pub dimension: usize,
    pub radius: f64,
    pub noise_model: NoiseModel,
    /// Corruption level for `learn` and `sweep`.
    pub noise_rate: f64,
    /// Initial corruption levels scanned by `denoise`.
    pub noise_grid: Vec<f64>,
    pub rule: DynamicsRule,
    pub schedule: ScheduleKind,
    pub rounds: usize,
    pub budgets: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub target: TargetKind,
    pub learner: LearnerKind,
    pub kernel_bandwidth: f64,
    pub reg_grid: Vec<f64>,
    /// Fresh points for the empirical error of non-linear cases.
    pub test_samples: usize,
    pub sweep_param: SweepParam,
    pub sweep_values: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_sensors: 10_000,
            dimension: 2,
            radius: 0.1,
            noise_model: NoiseModel::Random,
            noise_rate: 0.35,
            noise_grid: (1..=9).map(|k| k as f64 * 0.05).collect(),
            rule: DynamicsRule::Majority,
            schedule: ScheduleKind::Synchronous,
            rounds: 100,
            budgets: vec![5, 10, 20, 30, 45, 60],
            trials: 50,
            seed: 0,
            output_dir: None,
            target: TargetKind::Linear,
            learner: LearnerKind::Linear,
            kernel_bandwidth: 0.1,
            reg_grid: DEFAULT_REG_GRID.to_vec(),
            test_samples: 10_000,
            sweep_param: SweepParam::Sensors,
            sweep_values: Vec::new(),
        }
    }
}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> Error {
    Error::Config(format!("{key} = {value}: {why}"))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Parses config text on top of the defaults and validates the result.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::default();
        let mut rule = "majority".to_string();
        let mut direction_budget = DynamicsRule::DEFAULT_DIRECTION_BUDGET;
        let mut target = "linear".to_string();
        let mut amplitude = TargetConcept::DEFAULT_SINE_AMPLITUDE;
        let mut frequency = TargetConcept::DEFAULT_SINE_FREQUENCY;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "n_sensors" => c.n_sensors = scalar(key, value)?,
                "dimension" => c.dimension = scalar(key, value)?,
                "radius" => c.radius = scalar(key, value)?,
                "noise_model" => {
                    c.noise_model = match value {
                        "random" => NoiseModel::Random,
                        "pockets" => NoiseModel::Pockets,
                        _ => return Err(bad(key, value, "expected random or pockets")),
                    }
                }
                "noise_rate" => c.noise_rate = scalar(key, value)?,
                "noise_grid" => c.noise_grid = list(key, value)?,
                "rule" => rule = value.to_string(),
                "direction_budget" => direction_budget = scalar(key, value)?,
                "schedule" => {
                    c.schedule = match value {
                        "synchronous" => ScheduleKind::Synchronous,
                        "random" => ScheduleKind::Random,
                        "adversarial" => ScheduleKind::Adversarial,
                        _ => {
                            return Err(bad(
                                key,
                                value,
                                "expected synchronous, random or adversarial",
                            ))
                        }
                    }
                }
                "rounds" => c.rounds = scalar(key, value)?,
                "budgets" => c.budgets = list(key, value)?,
                "trials" => c.trials = scalar(key, value)?,
                "seed" => c.seed = scalar(key, value)?,
                "output_dir" => c.output_dir = Some(PathBuf::from(value)),
                "target" => target = value.to_string(),
                "sine_amplitude" => amplitude = scalar(key, value)?,
                "sine_frequency" => frequency = scalar(key, value)?,
                "learner" => {
                    c.learner = match value {
                        "linear" => LearnerKind::Linear,
                        "kernel" => LearnerKind::Kernel,
                        _ => return Err(bad(key, value, "expected linear or kernel")),
                    }
                }
                "kernel_bandwidth" => c.kernel_bandwidth = scalar(key, value)?,
                "reg_grid" => c.reg_grid = list(key, value)?,
                "test_samples" => c.test_samples = scalar(key, value)?,
                "sweep_param" => {
                    c.sweep_param = match value {
                        "n_sensors" => SweepParam::Sensors,
                        "radius" => SweepParam::Radius,
                        _ => return Err(bad(key, value, "expected n_sensors or radius")),
                    }
                }
                "sweep_values" => c.sweep_values = list(key, value)?,
                _ => return Err(Error::Config(format!("unknown key `{key}`"))),
            }
        }
        c.rule = match rule.as_str() {
            "majority" => DynamicsRule::Majority,
            "conservative" => DynamicsRule::Conservative { direction_budget },
            _ => return Err(bad("rule", &rule, "expected majority or conservative")),
        };
        c.target = match target.as_str() {
            "linear" => TargetKind::Linear,
            "sine" => TargetKind::Sine {
                amplitude,
                frequency,
            },
            _ => return Err(bad("target", &target, "expected linear or sine")),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        ExperimentConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.n_sensors == 0 {
            return fail("n_sensors must be positive".into());
        }
        if self.dimension == 0 {
            return fail("dimension must be positive".into());
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return fail(format!("radius must be positive, got {}", self.radius));
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                fail(format!("{name} must lie in [0, 1], got {p}"))
            }
        };
        prob("noise_rate", self.noise_rate)?;
        for &p in &self.noise_grid {
            prob("noise_grid", p)?;
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return fail(format!("budgets must be strictly increasing: {:?}", self.budgets));
        }
        if self.budgets.first().is_some_and(|&b| b < 2) {
            return fail("every budget must be at least 2".into());
        }
        if self.budgets.last().is_some_and(|&b| b > self.n_sensors) {
            return fail("budgets cannot exceed n_sensors".into());
        }
        if let DynamicsRule::Conservative { direction_budget: 0 } = self.rule {
            return fail("direction_budget must be at least 1".into());
        }
        if let TargetKind::Sine {
            amplitude,
            frequency,
        } = self.target
        {
            if self.dimension != 2 {
                return fail("the sine target needs dimension = 2".into());
            }
            if !(amplitude.is_finite() && frequency.is_finite()) {
                return fail("sine parameters must be finite".into());
            }
        }
        if !(self.kernel_bandwidth > 0.0 && self.kernel_bandwidth.is_finite()) {
            return fail("kernel_bandwidth must be positive".into());
        }
        if self.reg_grid.is_empty() || self.reg_grid.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return fail("reg_grid must be a non-empty list of positive values".into());
        }
        if self.test_samples == 0 {
            return fail("test_samples must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn parses_keys_and_comments() {
        let c = ExperimentConfig::parse(
            "# desk run\nn_sensors = 2000\nbudgets = 5, 10,20 # inline\n\
             rule = conservative\ndirection_budget = 16\nschedule = adversarial\n\
             target = sine\nsine_amplitude = 0.3\nnoise_model = pockets\n",
        )
        .unwrap();
        assert_eq!(c.n_sensors, 2000);
        assert_eq!(c.budgets, vec![5, 10, 20]);
        assert_eq!(c.rule, DynamicsRule::Conservative { direction_budget: 16 });
        assert_eq!(c.schedule, ScheduleKind::Adversarial);
        assert_eq!(c.noise_model, NoiseModel::Pockets);
        assert_eq!(
            c.target,
            TargetKind::Sine {
                amplitude: 0.3,
                frequency: TargetConcept::DEFAULT_SINE_FREQUENCY
            }
        );
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "trials = 0",
            "budgets = 10, 5",
            "budgets = 5, 5",
            "radius = -1",
            "noise_rate = 1.5",
            "colour = blue",
            "n_sensors = many",
            "just words",
            "rule = gossip",
            "target = sine\ndimension = 3",
        ] {
            let e = ExperimentConfig::parse(text).unwrap_err();
            assert!(e.is_configuration(), "{text}: {e}");
        }
    }
}
