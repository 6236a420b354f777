//! Learning the target boundary from label queries.
//!
//! * [`linear`]: the margin-based active learner. Each round samples labels
//!   inside a shrinking band around the current separator and minimizes a
//!   scaled hinge loss within a shrinking ball around the current weight.
//! * [`kernel`]: the same localization scheme in a reproducing-kernel space,
//!   solved through its dual.
//! * [`passive`]: regularized hinge minimization on uniformly drawn labels.
//!
//! Sensor labels are only ever read through a [`LabelOracle`].

pub mod kernel;
pub mod linear;
mod oracle;
pub mod passive;

use std::path::Path;

use crate::csvio::{fmt_f64, CsvBuf};
use crate::error::{Error, Result};
use crate::field::{dot, norm, Label, Point};

pub use kernel::{KernelHypothesis, KernelSpec};
pub use oracle::LabelOracle;

/// A labeled training example.
pub type Sample = Vec<(Point, Label)>;

/// Anything that assigns a real score whose sign is the predicted label.
pub trait Classifier {
    fn decision_value(&self, x: &[f64]) -> f64;

    /// Zero scores predict `Positive`.
    fn predict(&self, x: &[f64]) -> Label {
        Label::from_sign(self.decision_value(x))
    }
}

/// Unit-norm linear separator through the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHypothesis {
    weight: Vec<f64>,
}

impl LinearHypothesis {
    /// Normalizes `weight`; fails on a zero or non-finite vector.
    pub fn new(weight: Vec<f64>) -> Result<LinearHypothesis> {
        let n = norm(&weight);
        if !(n.is_finite() && n > 1e-300) {
            return Err(Error::Numerical(format!(
                "cannot normalize weight vector of norm {n}"
            )));
        }
        Ok(LinearHypothesis {
            weight: weight.into_iter().map(|x| x / n).collect(),
        })
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn dim(&self) -> usize {
        self.weight.len()
    }

    /// One coordinate per line, header `w`.
    pub fn to_csv(&self) -> String {
        let mut buf = CsvBuf::new(&["w"]);
        for &w in &self.weight {
            buf.row(&[fmt_f64(w)]);
        }
        buf.into_string()
    }
}

impl Classifier for LinearHypothesis {
    fn decision_value(&self, x: &[f64]) -> f64 {
        dot(&self.weight, x)
    }
}

/// Output of any learner.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    Linear(LinearHypothesis),
    Kernel(KernelHypothesis),
}

impl Hypothesis {
    pub fn as_linear(&self) -> Option<&LinearHypothesis> {
        match self {
            Hypothesis::Linear(h) => Some(h),
            Hypothesis::Kernel(_) => None,
        }
    }

    pub fn to_csv(&self) -> String {
        match self {
            Hypothesis::Linear(h) => h.to_csv(),
            Hypothesis::Kernel(h) => h.to_csv(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

impl Classifier for Hypothesis {
    fn decision_value(&self, x: &[f64]) -> f64 {
        match self {
            Hypothesis::Linear(h) => h.decision_value(x),
            Hypothesis::Kernel(h) => h.decision_value(x),
        }
    }
}

/// Iteration controls shared by the convex solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub max_iterations: usize,
    /// Base step, in units of the feasible radius for the primal solvers.
    pub step_size: f64,
    pub tolerance: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            max_iterations: 2000,
            step_size: 0.5,
            tolerance: 1e-10,
        }
    }
}

impl SolverParams {
    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.step_size > 0.0) || !(self.tolerance > 0.0) {
            return Err(Error::Config(format!("invalid solver parameters {self:?}")));
        }
        Ok(())
    }
}

/// Round cap of [`ActiveConfig::for_budget`]; later bands are narrower than
/// the spacing of a 10⁴-sensor field.
pub const MAX_BUDGET_ROUNDS: usize = 7;

/// Localization schedule and label allocation of the active learner.
///
/// Round `k` (1-based) uses band half-width `b_k = c_b·2^{-k}`, ball radius
/// `r_k = c_r·2^{-k}` and hinge scale `τ_k = c_τ·2^{-k}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActiveConfig {
    pub rounds: usize,
    pub band_constant: f64,
    pub radius_constant: f64,
    pub hinge_scale_constant: f64,
    pub labels_per_round: usize,
    pub initial_sample: usize,
    pub solver: SolverParams,
}

impl ActiveConfig {
    /// Defaults: `c_b = 1`, `c_r = 1`, `c_τ = 0.2`, `m_0 = m_k = 15·d`.
    pub fn for_dimension(d: usize, rounds: usize) -> ActiveConfig {
        ActiveConfig {
            rounds,
            band_constant: 1.0,
            radius_constant: 1.0,
            hinge_scale_constant: 0.2,
            labels_per_round: 15 * d,
            initial_sample: 15 * d,
            solver: SolverParams::default(),
        }
    }

    /// Splits a total label budget for desk-scale fields: `d` labels seed
    /// the initial hypothesis and the rest go to at most
    /// [`MAX_BUDGET_ROUNDS`] rounds of at least `2·d` labels each. Budgets
    /// too small for one round go entirely to the initial hypothesis. The
    /// schedule uses `c_b = 0.25`, `c_r = 2`, `c_τ = 1`.
    pub fn for_budget(d: usize, budget: usize) -> Result<ActiveConfig> {
        if d == 0 {
            return Err(Error::InvalidDimension(d));
        }
        if budget < 2 {
            return Err(Error::Config(format!("label budget {budget} is too small")));
        }
        let seed_labels = d.max(2).min(budget);
        let rest = budget - seed_labels;
        let rounds = (rest / (2 * d)).min(MAX_BUDGET_ROUNDS);
        let per_round = rest.checked_div(rounds).unwrap_or(0);
        // leftovers from the integer split go to the initial sample
        let initial = budget - rounds * per_round;
        Ok(ActiveConfig {
            rounds,
            band_constant: 0.25,
            radius_constant: 2.0,
            hinge_scale_constant: 1.0,
            labels_per_round: per_round,
            initial_sample: initial,
            solver: SolverParams::default(),
        })
    }

    pub fn band(&self, k: usize) -> f64 {
        self.band_constant * 0.5f64.powi(k as i32)
    }

    pub fn radius(&self, k: usize) -> f64 {
        self.radius_constant * 0.5f64.powi(k as i32)
    }

    pub fn hinge_scale(&self, k: usize) -> f64 {
        self.hinge_scale_constant * 0.5f64.powi(k as i32)
    }

    /// Upper bound on labels consumed: `m_0 + K·m_k`.
    pub fn label_cost(&self) -> usize {
        self.initial_sample + self.rounds * self.labels_per_round
    }

    pub fn validate(&self) -> Result<()> {
        let constants = [
            self.band_constant,
            self.radius_constant,
            self.hinge_scale_constant,
        ];
        if constants.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::Config(format!(
                "schedule constants must be positive: {constants:?}"
            )));
        }
        if self.labels_per_round == 0 && self.rounds > 0 {
            return Err(Error::Config("labels_per_round must be positive".into()));
        }
        self.solver.validate()
    }
}
