//! Passive SVM-style baseline: regularized hinge on uniformly drawn labels.

use nalgebra::{DMatrix, DVector};

use super::kernel::{KernelHypothesis, KernelSpec};
use super::linear::{hinge_loss, initial_sample};
use super::{Hypothesis, LabelOracle, LinearHypothesis, SolverParams};
use crate::error::{Error, Result};
use crate::field::{norm, Label, Point};

/// Default regularization grid.
pub const DEFAULT_REG_GRID: [f64; 5] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PassiveModel {
    Linear,
    Kernel(KernelSpec),
}

/// Minimizes `λ‖w‖² + mean hinge` by projected subgradient descent with
/// step `1/(2λt)`, returning the best (unnormalized) iterate.
pub fn fit_regularized_hinge(
    sample: &[(Point, Label)],
    lambda: f64,
    solver: &SolverParams,
) -> Result<Vec<f64>> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("regularization must be positive, got {lambda}")));
    }
    let d = sample[0].0.dim();
    // the optimum satisfies λ‖w‖² ≤ objective(0) = 1
    let max_norm = 1.0 / lambda.sqrt();
    let objective = |w: &[f64]| -> Result<(f64, Vec<f64>)> {
        let (h, g) = hinge_loss(w, sample, 1.0)?;
        let r: f64 = w.iter().map(|x| x * x).sum();
        Ok((lambda * r + h, g))
    };
    let mut w = vec![0.0; d];
    let (mut value, mut grad) = objective(&w)?;
    let mut best = (w.clone(), value);
    for t in 1..=solver.max_iterations {
        let step = 1.0 / (2.0 * lambda * t as f64);
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= step * (2.0 * lambda * *wi + gi);
        }
        let n = norm(&w);
        if n > max_norm {
            w.iter_mut().for_each(|x| *x *= max_norm / n);
        }
        (value, grad) = objective(&w)?;
        if !value.is_finite() {
            return Err(Error::Numerical("regularized hinge diverged".into()));
        }
        if value < best.1 {
            best = (w.clone(), value);
        }
    }
    Ok(best.0)
}

/// Kernel SVM through its box-constrained dual
/// `max Σα − ½ αᵀQα, 0 ≤ α ≤ 1/(2λm)`, solved by projected gradient ascent.
pub fn fit_kernel_svm(
    indices: &[usize],
    sample: &[(Point, Label)],
    lambda: f64,
    kernel: KernelSpec,
    solver: &SolverParams,
) -> Result<KernelHypothesis> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!("regularization must be positive, got {lambda}")));
    }
    let m = sample.len();
    let pts: Vec<&Point> = sample.iter().map(|(p, _)| p).collect();
    let gram = kernel.gram(&pts);
    let y = DVector::from_iterator(m, sample.iter().map(|(_, l)| l.as_f64()));
    let q = DMatrix::from_fn(m, m, |i, j| y[i] * y[j] * gram[(i, j)]);
    let c = 1.0 / (2.0 * lambda * m as f64);
    let lipschitz = gram.trace().max(1e-12);
    let step = 1.0 / lipschitz;
    let mut alpha = DVector::<f64>::zeros(m);
    for _ in 0..solver.max_iterations {
        let grad = DVector::from_element(m, 1.0) - &q * &alpha;
        let next = (&alpha + grad * step).map(|a| a.clamp(0.0, c));
        let moved = (&next - &alpha).norm();
        alpha = next;
        if moved <= solver.tolerance * c {
            break;
        }
    }
    KernelHypothesis::new(
        indices
            .iter()
            .zip(sample)
            .zip(alpha.iter())
            .map(|((&i, (p, l)), a)| (i, p.clone(), a * l.as_f64())),
        kernel,
    )
}

/// Queries `budget` uniformly random sensors, fits one model per
/// regularization value and keeps the one `evaluate` scores lowest.
pub fn passive_baseline(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    budget: usize,
    reg_grid: &[f64],
    model: PassiveModel,
    evaluate: &dyn Fn(&Hypothesis) -> f64,
    seed: u64,
) -> Result<Hypothesis> {
    if reg_grid.is_empty() {
        return Err(Error::Config("empty regularization grid".into()));
    }
    if budget > oracle.remaining() {
        return Err(Error::BudgetExceeded);
    }
    let (idx, sample) = initial_sample(oracle, positions, budget, seed)?;
    let solver = SolverParams::default();
    let mut best: Option<(f64, Hypothesis)> = None;
    for &lambda in reg_grid {
        let h = match model {
            PassiveModel::Linear => {
                let w = fit_regularized_hinge(&sample, lambda, &solver)?;
                match LinearHypothesis::new(w) {
                    Ok(h) => Hypothesis::Linear(h),
                    // every label on one side with a vanishing weight; skip
                    Err(_) => continue,
                }
            }
            PassiveModel::Kernel(k) => match fit_kernel_svm(&idx, &sample, lambda, k, &solver) {
                Ok(h) => Hypothesis::Kernel(h),
                Err(Error::DegenerateSolution) => continue,
                Err(e) => return Err(e),
            },
        };
        let score = evaluate(&h);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, h));
        }
    }
    best.map(|(_, h)| h)
        .ok_or_else(|| Error::Numerical("no regularization value produced a hypothesis".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_linear_target, sample_unit_ball, SensorField};
    use crate::learner::Classifier;

    fn separable(n: usize) -> Vec<(Point, Label)> {
        sample_unit_ball(n, 2, 4)
            .unwrap()
            .into_iter()
            .filter(|p| (p.coords()[0] - 0.2 * p.coords()[1]).abs() > 0.05)
            .map(|p| {
                let l = Label::from_sign(p.coords()[0] - 0.2 * p.coords()[1]);
                (p, l)
            })
            .collect()
    }

    #[test]
    fn tiny_lambda_fits_separable_data() {
        let s = separable(30);
        let w = fit_regularized_hinge(&s, 1e-6, &SolverParams::default()).unwrap();
        let (h, _) = hinge_loss(&w, &s, 1.0).unwrap();
        assert!(h < 1e-3, "{h}");
    }

    #[test]
    fn huge_lambda_shrinks_weight() {
        let s = separable(30);
        let w = fit_regularized_hinge(&s, 1e6, &SolverParams::default()).unwrap();
        assert!(norm(&w) < 1e-2);
    }

    #[test]
    fn empty_grid_is_rejected() {
        let labels = [Label::Positive; 4];
        let pts = sample_unit_ball(4, 2, 1).unwrap();
        let mut o = LabelOracle::new(&labels, 4);
        let r = passive_baseline(&mut o, &pts, 2, &[], PassiveModel::Linear, &|_| 0.0, 1);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn selection_uses_the_evaluation_functional() {
        let target = random_linear_target(2, 1).unwrap();
        let f = SensorField::generate(2000, target, 2).unwrap();
        let mut o = LabelOracle::new(f.current_labels(), 40);
        let h = passive_baseline(
            &mut o,
            f.positions(),
            40,
            &DEFAULT_REG_GRID,
            PassiveModel::Linear,
            &|h| h.as_linear().unwrap().weight()[0],
            3,
        )
        .unwrap();
        assert_eq!(o.queries_made(), 40);
        assert!(h.as_linear().is_some());
    }

    #[test]
    fn kernel_svm_separates_training_points() {
        let s = separable(40);
        let idx: Vec<usize> = (0..s.len()).collect();
        let k = KernelSpec::gaussian(0.3).unwrap();
        let h = fit_kernel_svm(&idx, &s, 1e-4, k, &SolverParams::default()).unwrap();
        let wrong = s.iter().filter(|(p, l)| h.predict(p.coords()) != *l).count();
        assert_eq!(wrong, 0);
    }
}
