//! Denoising dynamics on the communication graph.
//!
//! Two update rules ([`DynamicsRule`]) run under one of several schedules
//! ([`UpdateSchedule`]). A synchronous round updates every sensor once from
//! the previous labels; an asynchronous round performs N single-sensor
//! updates, so the two are comparable per round.

mod conservative;

use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::csvio::{fmt_f64, CsvBuf};
use crate::error::{Error, Result};
use crate::field::{dot, Label, Point, SensorField};
use crate::graph::NeighborGraph;
use crate::seed;

/// Order in which asynchronous updates visit sensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AsyncOrder {
    /// A fresh uniformly random permutation every round.
    RandomPermutationPerRound { seed: u64 },
    /// Explicit indices, consumed cyclically across rounds.
    GivenSequence(Vec<usize>),
    /// Ascending projection onto the target normal, replayed every round.
    AdversarialSweep,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdateSchedule {
    Synchronous,
    Asynchronous(AsyncOrder),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsRule {
    /// Strict majority of neighbor labels; ties and isolation keep the label.
    Majority,
    /// Conservative best-response; `direction_budget` is only used for d ≥ 3.
    Conservative { direction_budget: usize },
}

impl DynamicsRule {
    pub const DEFAULT_DIRECTION_BUDGET: usize = 64;

    pub fn conservative() -> DynamicsRule {
        DynamicsRule::Conservative {
            direction_budget: Self::DEFAULT_DIRECTION_BUDGET,
        }
    }
}

/// Per-round history of a dynamics run. Index 0 is the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub noise_rates: Vec<f64>,
    pub flips: Vec<usize>,
    /// Flips that turned a correct label into an incorrect one.
    pub wrong_flips: Vec<usize>,
    pub final_labels: Vec<Label>,
}

impl Trajectory {
    pub fn rounds(&self) -> usize {
        self.noise_rates.len() - 1
    }

    pub fn initial_noise(&self) -> f64 {
        self.noise_rates[0]
    }

    pub fn final_noise(&self) -> f64 {
        *self.noise_rates.last().expect("trajectory is never empty")
    }

    pub fn total_wrong_flips(&self) -> usize {
        self.wrong_flips.iter().sum()
    }

    /// CSV with header `round,noise_rate,flips`.
    pub fn to_csv(&self) -> String {
        let mut buf = CsvBuf::new(&["round", "noise_rate", "flips"]);
        for (k, (rate, flips)) in self.noise_rates.iter().zip(&self.flips).enumerate() {
            buf.row(&[k.to_string(), fmt_f64(*rate), flips.to_string()]);
        }
        buf.into_string()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[inline]
fn majority_of(graph: &NeighborGraph, labels: &[Label], i: usize) -> Label {
    match graph.neighbor_sum(labels, i) {
        s if s > 0 => Label::Positive,
        s if s < 0 => Label::Negative,
        _ => labels[i],
    }
}

fn check_len(graph: &NeighborGraph, labels: &[Label]) -> Result<()> {
    if labels.len() != graph.len() {
        return Err(Error::LengthMismatch {
            expected: graph.len(),
            found: labels.len(),
        });
    }
    Ok(())
}

fn check_index(graph: &NeighborGraph, i: usize) -> Result<()> {
    if i >= graph.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: graph.len(),
        });
    }
    Ok(())
}

/// One simultaneous majority update; reads only the old labels.
pub fn majority_step_synchronous(graph: &NeighborGraph, labels: &[Label]) -> Result<Vec<Label>> {
    check_len(graph, labels)?;
    Ok((0..labels.len())
        .into_par_iter()
        .map(|i| majority_of(graph, labels, i))
        .collect())
}

/// Updates sensor `i` in place to the strict majority of its neighbors.
pub fn majority_update_async(graph: &NeighborGraph, labels: &mut [Label], i: usize) -> Result<bool> {
    check_len(graph, labels)?;
    check_index(graph, i)?;
    let next = majority_of(graph, labels, i);
    let flipped = next != labels[i];
    labels[i] = next;
    Ok(flipped)
}

/// Applies the conservative rule to sensor `i` in place.
pub fn conservative_update(
    graph: &NeighborGraph,
    positions: &[Point],
    labels: &mut [Label],
    i: usize,
    direction_budget: usize,
) -> Result<bool> {
    check_len(graph, labels)?;
    check_index(graph, i)?;
    if positions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            expected: labels.len(),
            found: positions.len(),
        });
    }
    match conservative::decide(graph, positions, labels, i, direction_budget) {
        Some(l) if l != labels[i] => {
            labels[i] = l;
            Ok(true)
        }
        _ => Ok(false),
    }
}

/// Sensor indices in ascending order of `w*·x`, ties broken by index.
pub fn adversarial_order(field: &SensorField) -> Result<Vec<usize>> {
    let w = field.target().linear_weight().ok_or(Error::UnsupportedTarget)?;
    let proj: Vec<f64> = field.positions().iter().map(|p| dot(w, p.coords())).collect();
    let mut order: Vec<usize> = (0..field.len()).collect();
    order.sort_by(|&a, &b| proj[a].total_cmp(&proj[b]).then(a.cmp(&b)));
    Ok(order)
}

struct Stepper<'a> {
    graph: &'a NeighborGraph,
    positions: &'a [Point],
    rule: DynamicsRule,
}

impl Stepper<'_> {
    fn next_label(&self, labels: &[Label], i: usize) -> Label {
        match self.rule {
            DynamicsRule::Majority => majority_of(self.graph, labels, i),
            DynamicsRule::Conservative { direction_budget } => {
                conservative::decide(self.graph, self.positions, labels, i, direction_budget)
                    .unwrap_or(labels[i])
            }
        }
    }
}

enum OrderState {
    Random(Box<seed::Rng>, Vec<usize>),
    Cyclic(Vec<usize>, usize),
    Fixed(Vec<usize>),
}

impl OrderState {
    fn next_round(&mut self, n: usize) -> Vec<usize> {
        match self {
            OrderState::Random(rng, perm) => {
                perm.shuffle(rng);
                perm.clone()
            }
            OrderState::Cyclic(seq, cursor) => (0..n)
                .map(|_| {
                    let i = seq[*cursor];
                    *cursor = (*cursor + 1) % seq.len();
                    i
                })
                .collect(),
            OrderState::Fixed(order) => order.clone(),
        }
    }
}

/// Runs `rounds` rounds of dynamics starting from the field's current labels.
pub fn run(
    field: &SensorField,
    graph: &NeighborGraph,
    rule: DynamicsRule,
    schedule: &UpdateSchedule,
    rounds: usize,
) -> Result<Trajectory> {
    let n = field.len();
    check_len(graph, field.current_labels())?;
    if let DynamicsRule::Conservative { direction_budget: 0 } = rule {
        return Err(Error::Config("conservative direction budget must be at least 1".into()));
    }
    let truth = field.true_labels();
    let stepper = Stepper {
        graph,
        positions: field.positions(),
        rule,
    };
    let mut order = match schedule {
        UpdateSchedule::Synchronous => None,
        UpdateSchedule::Asynchronous(AsyncOrder::RandomPermutationPerRound { seed }) => Some(
            OrderState::Random(Box::new(seed::rng(*seed)), (0..n).collect()),
        ),
        UpdateSchedule::Asynchronous(AsyncOrder::GivenSequence(seq)) => {
            if let Some(&bad) = seq.iter().find(|&&i| i >= n) {
                return Err(Error::IndexOutOfRange { index: bad, len: n });
            }
            if seq.is_empty() && n > 0 {
                return Err(Error::Config("empty update sequence".into()));
            }
            Some(OrderState::Cyclic(seq.clone(), 0))
        }
        UpdateSchedule::Asynchronous(AsyncOrder::AdversarialSweep) => {
            Some(OrderState::Fixed(adversarial_order(field)?))
        }
    };

    let mut labels = field.current_labels().to_vec();
    let mut wrong = field.incorrect_count();
    let rate = |wrong: usize| if n == 0 { 0.0 } else { wrong as f64 / n as f64 };
    let mut traj = Trajectory {
        noise_rates: vec![rate(wrong)],
        flips: vec![0],
        wrong_flips: vec![0],
        final_labels: Vec::new(),
    };

    // a silent round over every sensor is a fixed point of both rules
    let covers_all = !matches!(order, Some(OrderState::Cyclic(..)));
    for _ in 0..rounds {
        if covers_all && traj.rounds() > 0 && traj.flips.last() == Some(&0) {
            traj.noise_rates.push(rate(wrong));
            traj.flips.push(0);
            traj.wrong_flips.push(0);
            continue;
        }
        let (mut flips, mut bad) = (0usize, 0usize);
        match order.as_mut() {
            None => {
                let next: Vec<Label> = (0..n)
                    .into_par_iter()
                    .map(|i| stepper.next_label(&labels, i))
                    .collect();
                for i in 0..n {
                    if next[i] != labels[i] {
                        flips += 1;
                        if labels[i] == truth[i] {
                            bad += 1;
                        }
                    }
                }
                labels = next;
            }
            Some(state) => {
                for i in state.next_round(n) {
                    let next = stepper.next_label(&labels, i);
                    if next != labels[i] {
                        flips += 1;
                        if labels[i] == truth[i] {
                            bad += 1;
                        }
                        labels[i] = next;
                    }
                }
            }
        }
        wrong = labels.iter().zip(truth).filter(|(a, b)| a != b).count();
        traj.noise_rates.push(rate(wrong));
        traj.flips.push(flips);
        traj.wrong_flips.push(bad);
    }
    traj.final_labels = labels;
    Ok(traj)
}
