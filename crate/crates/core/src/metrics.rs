//! Error and noise measurements.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{dot, sample_point, SensorField, TargetConcept};
use crate::learner::{Classifier, LinearHypothesis};
use crate::seed;

/// Summary of one learning run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub noise_rate: f64,
    pub generalization_error: f64,
    /// Only meaningful for linear hypotheses against linear targets.
    pub angle_radians: Option<f64>,
    pub labels_used: usize,
}

/// Fraction of sensors whose current label is wrong.
pub fn noise_rate(field: &SensorField) -> f64 {
    field.noise_rate()
}

/// `arccos(h·t)/π`: the disagreement mass of two origin-through separators
/// under any rotation-invariant distribution.
pub fn angle_error(h: &LinearHypothesis, target: &LinearHypothesis) -> Result<f64> {
    if h.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            found: h.dim(),
        });
    }
    Ok(dot(h.weight(), target.weight()).clamp(-1.0, 1.0).acos() / PI)
}

/// Angle between the hypothesis and a linear target concept, in radians.
pub fn angle_radians(h: &LinearHypothesis, target: &TargetConcept) -> Result<f64> {
    let w = target.linear_weight().ok_or(Error::UnsupportedTarget)?;
    let t = LinearHypothesis::new(w.to_vec())?;
    Ok(angle_error(h, &t)? * PI)
}

/// Disagreement rate with `target` on `n_test` fresh uniform ball samples.
pub fn empirical_error<C: Classifier + ?Sized>(
    h: &C,
    target: &TargetConcept,
    n_test: usize,
    seed: u64,
) -> Result<f64> {
    if n_test == 0 {
        return Err(Error::EmptySample);
    }
    let mut rng = seed::rng(seed);
    let d = target.dim();
    let mut wrong = 0usize;
    for _ in 0..n_test {
        let x = sample_point(d, &mut rng);
        if h.predict(x.coords()) != target.label(x.coords())? {
            wrong += 1;
        }
    }
    Ok(wrong as f64 / n_test as f64)
}
