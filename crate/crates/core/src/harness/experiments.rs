//! Runners behind the `denoise`, `learn` and `sweep` commands.
//!
//! Trial `t` draws everything from `derive(master, [TRIAL, t])`, so trials
//! run in parallel without changing a single output byte.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::{ExperimentConfig, LearnerKind, NoiseModel, ScheduleKind, SweepParam, TargetKind};
use crate::csvio::{fmt_f64, CsvBuf};
use crate::dynamics::{run, AsyncOrder, Trajectory, UpdateSchedule};
use crate::error::{Error, Result};
use crate::field::{random_linear_target, SensorField, TargetConcept};
use crate::graph::{build_graph, NeighborGraph};
use crate::learner::kernel::kernel_active_learn;
use crate::learner::linear::active_learn;
use crate::learner::passive::{passive_baseline, PassiveModel};
use crate::learner::{ActiveConfig, Hypothesis, KernelSpec, LabelOracle};
use crate::metrics::{angle_error, empirical_error};
use crate::seed;

const TRIAL: u64 = 0x7121;
const TARGET: u64 = 1;
const POSITIONS: u64 = 2;
const NOISE: u64 = 3;
const ORDER: u64 = 4;
const ACTIVE: u64 = 5;
const PASSIVE: u64 = 6;
const TEST: u64 = 7;

fn trial_seed(cfg: &ExperimentConfig, trial: usize) -> u64 {
    seed::derive(cfg.seed, &[TRIAL, trial as u64])
}

fn target_for(cfg: &ExperimentConfig, ts: u64) -> Result<TargetConcept> {
    match cfg.target {
        TargetKind::Linear => random_linear_target(cfg.dimension, seed::child(ts, TARGET)),
        TargetKind::Sine {
            amplitude,
            frequency,
        } => Ok(TargetConcept::sine(amplitude, frequency)),
    }
}

/// Clean field and communication graph of one trial.
fn world(cfg: &ExperimentConfig, ts: u64) -> Result<(SensorField, NeighborGraph)> {
    let field = SensorField::generate(cfg.n_sensors, target_for(cfg, ts)?, seed::child(ts, POSITIONS))?;
    let graph = build_graph(field.positions(), cfg.radius)?;
    Ok((field, graph))
}

fn corrupt(
    cfg: &ExperimentConfig,
    field: &SensorField,
    graph: &NeighborGraph,
    eta: f64,
    noise_seed: u64,
) -> Result<SensorField> {
    match cfg.noise_model {
        NoiseModel::Random => field.corrupt_random(eta, noise_seed),
        NoiseModel::Pockets => field.corrupt_pockets(graph, eta, noise_seed),
    }
}

fn denoise_field(
    cfg: &ExperimentConfig,
    field: &SensorField,
    graph: &NeighborGraph,
    ts: u64,
) -> Result<Trajectory> {
    let schedule = match cfg.schedule {
        ScheduleKind::Synchronous => UpdateSchedule::Synchronous,
        ScheduleKind::Random => UpdateSchedule::Asynchronous(AsyncOrder::RandomPermutationPerRound {
            seed: seed::child(ts, ORDER),
        }),
        ScheduleKind::Adversarial => UpdateSchedule::Asynchronous(AsyncOrder::AdversarialSweep),
    };
    run(field, graph, cfg.rule, &schedule, cfg.rounds)
}

/// Per-trial noise trajectories for every initial noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct DenoiseReport {
    pub etas: Vec<f64>,
    /// `noise[e][t][k]`: noise after `k` rounds for level `e`, trial `t`.
    pub noise: Vec<Vec<Vec<f64>>>,
}

impl DenoiseReport {
    pub fn mean_initial_noise(&self, e: usize) -> f64 {
        mean(self.noise[e].iter().map(|t| t[0]))
    }

    pub fn mean_final_noise(&self, e: usize) -> f64 {
        mean(self.noise[e].iter().map(|t| *t.last().expect("round 0 is always recorded")))
    }

    pub fn trajectories_csv(&self) -> String {
        let mut csv = CsvBuf::new(&["eta_initial", "trial", "round", "noise_rate"]);
        for (eta, trials) in self.etas.iter().zip(&self.noise) {
            for (t, traj) in trials.iter().enumerate() {
                for (k, rate) in traj.iter().enumerate() {
                    csv.row(&[fmt_f64(*eta), t.to_string(), k.to_string(), fmt_f64(*rate)]);
                }
            }
        }
        csv.into_string()
    }

    pub fn summary_csv(&self) -> String {
        let mut csv = CsvBuf::new(&["eta_initial", "mean_final_noise"]);
        for (e, eta) in self.etas.iter().enumerate() {
            csv.row(&[fmt_f64(*eta), fmt_f64(self.mean_final_noise(e))]);
        }
        csv.into_string()
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        write_all(
            dir,
            &[
                ("denoise_trajectories.csv", self.trajectories_csv()),
                ("denoise_summary.csv", self.summary_csv()),
            ],
        )
    }
}

/// Runs the denoising dynamics for every level in `noise_grid`. Levels share
/// each trial's positions and graph.
pub fn denoise(cfg: &ExperimentConfig) -> Result<DenoiseReport> {
    cfg.validate()?;
    if cfg.noise_grid.is_empty() {
        return Err(Error::Config("noise_grid is empty".into()));
    }
    let per_trial: Vec<Vec<Vec<f64>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let ts = trial_seed(cfg, t);
            let (field, graph) = world(cfg, ts)?;
            cfg.noise_grid
                .iter()
                .enumerate()
                .map(|(e, &eta)| {
                    let noisy = corrupt(cfg, &field, &graph, eta, seed::derive(ts, &[NOISE, e as u64]))?;
                    Ok(denoise_field(cfg, &noisy, &graph, ts)?.noise_rates)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let noise = (0..cfg.noise_grid.len())
        .map(|e| per_trial.iter().map(|t| t[e].clone()).collect())
        .collect();
    Ok(DenoiseReport {
        etas: cfg.noise_grid.clone(),
        noise,
    })
}

/// Learner and label state of one learning-curve series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Condition {
    ActivePre,
    ActivePost,
    PassivePre,
    PassivePost,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::ActivePre,
        Condition::ActivePost,
        Condition::PassivePre,
        Condition::PassivePost,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Condition::ActivePre => "active_pre",
            Condition::ActivePost => "active_post",
            Condition::PassivePre => "passive_pre",
            Condition::PassivePost => "passive_post",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnRecord {
    pub condition: Condition,
    pub budget: usize,
    pub trial: usize,
    pub error: f64,
    /// Taken from the oracle log.
    pub labels_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnReport {
    pub budgets: Vec<usize>,
    pub records: Vec<LearnRecord>,
    /// `(noise before, noise after)` denoising, per trial.
    pub noise: Vec<(f64, f64)>,
}

impl LearnReport {
    fn errors(&self, c: Condition, budget: usize) -> impl Iterator<Item = f64> + '_ {
        self.records
            .iter()
            .filter(move |r| r.condition == c && r.budget == budget)
            .map(|r| r.error)
    }

    pub fn mean_error(&self, c: Condition, budget: usize) -> f64 {
        mean(self.errors(c, budget))
    }

    /// Sample standard deviation; zero for a single trial.
    pub fn std_error(&self, c: Condition, budget: usize) -> f64 {
        sample_std(&self.errors(c, budget).collect::<Vec<_>>())
    }

    pub fn mean_noise_pre(&self) -> f64 {
        mean(self.noise.iter().map(|n| n.0))
    }

    pub fn mean_noise_post(&self) -> f64 {
        mean(self.noise.iter().map(|n| n.1))
    }

    pub fn errors_csv(&self) -> String {
        let mut csv = CsvBuf::new(&["condition", "budget", "trial", "error"]);
        for r in &self.records {
            csv.row(&[
                r.condition.name().to_string(),
                r.budget.to_string(),
                r.trial.to_string(),
                fmt_f64(r.error),
            ]);
        }
        csv.into_string()
    }

    pub fn labels_csv(&self) -> String {
        let mut csv = CsvBuf::new(&["condition", "budget", "trial", "labels_used"]);
        for r in &self.records {
            csv.row(&[
                r.condition.name().to_string(),
                r.budget.to_string(),
                r.trial.to_string(),
                r.labels_used.to_string(),
            ]);
        }
        csv.into_string()
    }

    pub fn summary_csv(&self) -> String {
        let mut csv = CsvBuf::new(&["condition", "budget", "mean_error", "std_error"]);
        for c in Condition::ALL {
            for &b in &self.budgets {
                csv.row(&[
                    c.name().to_string(),
                    b.to_string(),
                    fmt_f64(self.mean_error(c, b)),
                    fmt_f64(self.std_error(c, b)),
                ]);
            }
        }
        csv.into_string()
    }

    pub fn noise_csv(&self) -> String {
        let mut csv = CsvBuf::new(&["trial", "noise_pre", "noise_post"]);
        for (t, (pre, post)) in self.noise.iter().enumerate() {
            csv.row(&[t.to_string(), fmt_f64(*pre), fmt_f64(*post)]);
        }
        csv.into_string()
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        write_all(
            dir,
            &[
                ("learn_errors.csv", self.errors_csv()),
                ("learn_summary.csv", self.summary_csv()),
                ("learn_labels.csv", self.labels_csv()),
                ("learn_noise.csv", self.noise_csv()),
            ],
        )
    }
}

/// Generalization error: the exact angle mass for linear pairs, a fresh
/// uniform test sample otherwise.
fn generalization_error(
    cfg: &ExperimentConfig,
    h: &Hypothesis,
    target: &TargetConcept,
    test_seed: u64,
) -> Result<f64> {
    match (h, target.linear_weight()) {
        (Hypothesis::Linear(lin), Some(w)) => {
            angle_error(lin, &crate::learner::LinearHypothesis::new(w.to_vec())?)
        }
        _ => empirical_error(h, target, cfg.test_samples, test_seed),
    }
}

fn learn_trial(cfg: &ExperimentConfig, trial: usize) -> Result<(Vec<LearnRecord>, (f64, f64))> {
    let ts = trial_seed(cfg, trial);
    let (clean, graph) = world(cfg, ts)?;
    let pre = corrupt(cfg, &clean, &graph, cfg.noise_rate, seed::child(ts, NOISE))?;
    let post = pre.with_labels(denoise_field(cfg, &pre, &graph, ts)?.final_labels)?;
    let target = clean.target();
    let test_seed = seed::child(ts, TEST);
    let kernel = KernelSpec::gaussian(cfg.kernel_bandwidth)?;
    let evaluate = |h: &Hypothesis| {
        // the functional cannot fail for validated configs
        generalization_error(cfg, h, target, test_seed).unwrap_or(f64::INFINITY)
    };

    let mut records = Vec::with_capacity(4 * cfg.budgets.len());
    for &budget in &cfg.budgets {
        for (field, active_cond, passive_cond) in [
            (&pre, Condition::ActivePre, Condition::PassivePre),
            (&post, Condition::ActivePost, Condition::PassivePost),
        ] {
            // pre and post share query seeds so only the labels differ
            let active_seed = seed::derive(ts, &[ACTIVE, budget as u64]);
            let passive_seed = seed::derive(ts, &[PASSIVE, budget as u64]);

            let mut oracle = LabelOracle::new(field.current_labels(), budget);
            let config = ActiveConfig::for_budget(cfg.dimension, budget)?;
            let h = match cfg.learner {
                LearnerKind::Linear => Hypothesis::Linear(active_learn(
                    &mut oracle,
                    field.positions(),
                    &config,
                    active_seed,
                )?),
                LearnerKind::Kernel => Hypothesis::Kernel(kernel_active_learn(
                    &mut oracle,
                    field.positions(),
                    &config,
                    kernel,
                    active_seed,
                )?),
            };
            records.push(LearnRecord {
                condition: active_cond,
                budget,
                trial,
                error: generalization_error(cfg, &h, target, test_seed)?,
                labels_used: oracle.log().len(),
            });

            let mut oracle = LabelOracle::new(field.current_labels(), budget);
            let model = match cfg.learner {
                LearnerKind::Linear => PassiveModel::Linear,
                LearnerKind::Kernel => PassiveModel::Kernel(kernel),
            };
            let h = passive_baseline(
                &mut oracle,
                field.positions(),
                budget,
                &cfg.reg_grid,
                model,
                &evaluate,
                passive_seed,
            )?;
            records.push(LearnRecord {
                condition: passive_cond,
                budget,
                trial,
                error: generalization_error(cfg, &h, target, test_seed)?,
                labels_used: oracle.log().len(),
            });
        }
    }
    Ok((records, (pre.noise_rate(), post.noise_rate())))
}

/// Learning curves of the four conditions over the configured budgets.
pub fn learn(cfg: &ExperimentConfig) -> Result<LearnReport> {
    cfg.validate()?;
    if cfg.budgets.is_empty() {
        return Err(Error::Config("budgets is empty".into()));
    }
    let trials: Vec<_> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| learn_trial(cfg, t))
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut noise = Vec::with_capacity(trials.len());
    for (r, n) in trials {
        records.extend(r);
        noise.push(n);
    }
    records.sort_by_key(|r| (r.condition, r.budget, r.trial));
    Ok(LearnReport {
        budgets: cfg.budgets.clone(),
        records,
        noise,
    })
}

/// One learning report per grid value of the swept parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub param: SweepParam,
    pub points: Vec<(f64, LearnReport)>,
}

impl SweepReport {
    pub fn summary_csv(&self) -> String {
        let mut csv = CsvBuf::new(&[
            "sweep_param",
            "value",
            "condition",
            "budget",
            "mean_error",
            "std_error",
            "mean_noise_pre",
            "mean_noise_post",
        ]);
        for (value, rep) in &self.points {
            for c in Condition::ALL {
                for &b in &rep.budgets {
                    csv.row(&[
                        self.param.to_string(),
                        fmt_f64(*value),
                        c.name().to_string(),
                        b.to_string(),
                        fmt_f64(rep.mean_error(c, b)),
                        fmt_f64(rep.std_error(c, b)),
                        fmt_f64(rep.mean_noise_pre()),
                        fmt_f64(rep.mean_noise_post()),
                    ]);
                }
            }
        }
        csv.into_string()
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        for (value, rep) in &self.points {
            written.extend(rep.write(&dir.join(format!("{}_{value}", self.param)))?);
        }
        written.extend(write_all(dir, &[("sweep_summary.csv", self.summary_csv())])?);
        Ok(written)
    }
}

/// Applies one sweep value to a copy of the base configuration.
pub fn sweep_point(cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    match cfg.sweep_param {
        SweepParam::Sensors => {
            if !(value >= 1.0 && value.fract() == 0.0 && value <= usize::MAX as f64) {
                return Err(Error::Config(format!("n_sensors sweep value {value} is not a count")));
            }
            c.n_sensors = value as usize;
        }
        SweepParam::Radius => c.radius = value,
    }
    c.validate()?;
    Ok(c)
}

/// Runs [`learn`] at every value of `sweep_values`.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    if cfg.sweep_values.is_empty() {
        return Err(Error::Config("sweep_values is empty".into()));
    }
    let configs = cfg
        .sweep_values
        .iter()
        .map(|&v| sweep_point(cfg, v))
        .collect::<Result<Vec<_>>>()?;
    let points = cfg
        .sweep_values
        .iter()
        .zip(&configs)
        .map(|(&v, c)| Ok((v, learn(c)?)))
        .collect::<Result<_>>()?;
    Ok(SweepReport {
        param: cfg.sweep_param,
        points,
    })
}

pub fn cmd_denoise(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    denoise(cfg)?.write(out)
}

pub fn cmd_learn(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    learn(cfg)?.write(out)
}

pub fn cmd_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    sweep(cfg)?.write(out)
}

fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    files
        .iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

pub(crate) fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

pub(crate) fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values.iter().copied());
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}
