//! Kernelized localization learner.
//!
//! Each round replaces the ball constraint around the previous weight by the
//! equivalent cap `⟨w, w_prev⟩ ≥ 1 − r²/2` on unit vectors, which makes the
//! hinge-minimization dual depend on the data only through kernel values:
//!
//! ```text
//! max_{α ∈ [0,1]^m, β ≥ 0}  τ·Σα_i + τ·β·(1 − r²/2) − ‖Σ α_i y_i Φ(x_i) + β·τ·w_prev‖
//! ```
//!
//! The new hypothesis is the normalized direction inside the norm.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::linear::{band_members, initial_sample, query_band};
use super::{ActiveConfig, Classifier, LabelOracle, SolverParams};
use crate::csvio::{fmt_f64, CsvBuf};
use crate::error::{Error, Result};
use crate::field::{dot, Label, Point};
use crate::seed;

const INITIAL_STREAM: u64 = 1;
const ROUND_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(−‖x − y‖² / (2σ²))`.
    Gaussian { bandwidth: f64 },
    /// Plain inner product; reduces the kernel learner to the linear one.
    Linear,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<KernelSpec> {
        if !(bandwidth > 0.0 && bandwidth.is_finite()) {
            return Err(Error::Config(format!("kernel bandwidth must be positive, got {bandwidth}")));
        }
        Ok(KernelSpec::Gaussian { bandwidth })
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Gaussian { bandwidth } => {
                let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-sq / (2.0 * bandwidth * bandwidth)).exp()
            }
            KernelSpec::Linear => dot(a, b),
        }
    }

    pub fn gram(&self, points: &[&Point]) -> DMatrix<f64> {
        let m = points.len();
        DMatrix::from_fn(m, m, |i, j| self.eval(points[i].coords(), points[j].coords()))
    }
}

/// `f(x) = Σ c_l k(s_l, x)` over sensor support points, unit RKHS norm.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelHypothesis {
    support_indices: Vec<usize>,
    support_points: Vec<Point>,
    coefficients: Vec<f64>,
    kernel: KernelSpec,
}

impl KernelHypothesis {
    /// Builds and normalizes an expansion; terms sharing an index are merged.
    pub fn new(
        terms: impl IntoIterator<Item = (usize, Point, f64)>,
        kernel: KernelSpec,
    ) -> Result<KernelHypothesis> {
        let mut merged: BTreeMap<usize, (Point, f64)> = BTreeMap::new();
        for (i, p, c) in terms {
            merged
                .entry(i)
                .and_modify(|e| e.1 += c)
                .or_insert((p, c));
        }
        let mut h = KernelHypothesis {
            support_indices: Vec::with_capacity(merged.len()),
            support_points: Vec::with_capacity(merged.len()),
            coefficients: Vec::with_capacity(merged.len()),
            kernel,
        };
        for (i, (p, c)) in merged {
            if c != 0.0 {
                h.support_indices.push(i);
                h.support_points.push(p);
                h.coefficients.push(c);
            }
        }
        let n = h.rkhs_norm();
        if !(n.is_finite() && n > 1e-12) {
            return Err(Error::DegenerateSolution);
        }
        h.coefficients.iter_mut().for_each(|c| *c /= n);
        Ok(h)
    }

    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }

    pub fn support_points(&self) -> &[Point] {
        &self.support_points
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn kernel(&self) -> KernelSpec {
        self.kernel
    }

    pub fn rkhs_norm(&self) -> f64 {
        let pts: Vec<&Point> = self.support_points.iter().collect();
        let k = self.kernel.gram(&pts);
        let c = DVector::from_column_slice(&self.coefficients);
        c.dot(&(&k * &c)).max(0.0).sqrt()
    }

    fn terms(&self) -> impl Iterator<Item = (usize, Point, f64)> + '_ {
        self.support_indices
            .iter()
            .zip(&self.support_points)
            .zip(&self.coefficients)
            .map(|((&i, p), &c)| (i, p.clone(), c))
    }

    /// `# kernel=...` comment line, then `index,coefficient` rows.
    pub fn to_csv(&self) -> String {
        let spec = match self.kernel {
            KernelSpec::Gaussian { bandwidth } => format!("gaussian bandwidth={}", fmt_f64(bandwidth)),
            KernelSpec::Linear => "linear".to_string(),
        };
        let mut buf = CsvBuf::new(&["index", "coefficient"]);
        for (&i, &c) in self.support_indices.iter().zip(&self.coefficients) {
            buf.row(&[i.to_string(), fmt_f64(c)]);
        }
        format!("# kernel={spec}\n{}", buf.as_str())
    }
}

impl Classifier for KernelHypothesis {
    fn decision_value(&self, x: &[f64]) -> f64 {
        self.support_points
            .iter()
            .zip(&self.coefficients)
            .map(|(p, c)| c * self.kernel.eval(p.coords(), x))
            .sum()
    }
}

/// Result of [`kernel_dual_solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub beta: f64,
    pub objective: f64,
    /// Smoothed objective at each stage start and accepted ascent step.
    pub history: Vec<f64>,
}

/// The dual objective for fixed data.
#[derive(Debug, Clone)]
pub struct DualProblem {
    /// `Q = diag(y) K diag(y)`.
    q: DMatrix<f64>,
    /// `y_i · f_prev(x_i)`.
    yp: DVector<f64>,
    tau: f64,
    cap: f64,
}

impl DualProblem {
    pub fn new(
        gram: &DMatrix<f64>,
        labels: &[Label],
        prev_values: &[f64],
        tau: f64,
        radius: f64,
    ) -> Result<DualProblem> {
        let m = labels.len();
        if gram.nrows() != m || gram.ncols() != m {
            return Err(Error::InvalidKernel(format!(
                "gram is {}x{} for {m} labels",
                gram.nrows(),
                gram.ncols()
            )));
        }
        if prev_values.len() != m {
            return Err(Error::LengthMismatch {
                expected: m,
                found: prev_values.len(),
            });
        }
        if m == 0 {
            return Err(Error::EmptySample);
        }
        if !(tau > 0.0) || !(radius > 0.0) {
            return Err(Error::Config(format!("invalid tau {tau} or radius {radius}")));
        }
        check_psd(gram)?;
        let y = DVector::from_iterator(m, labels.iter().map(|l| l.as_f64()));
        let q = DMatrix::from_fn(m, m, |i, j| y[i] * y[j] * gram[(i, j)]);
        let yp = DVector::from_iterator(m, (0..m).map(|i| y[i] * prev_values[i]));
        Ok(DualProblem {
            q,
            yp,
            tau,
            cap: 1.0 - radius * radius / 2.0,
        })
    }

    pub fn len(&self) -> usize {
        self.yp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yp.is_empty()
    }

    /// `‖Σ α_i y_i Φ(x_i) + β τ w_prev‖²` through kernel values.
    fn norm_sq(&self, alpha: &DVector<f64>, beta: f64) -> f64 {
        let t = self.tau;
        let v = alpha.dot(&(&self.q * alpha)) + 2.0 * beta * t * alpha.dot(&self.yp) + beta * beta * t * t;
        v.max(0.0)
    }

    pub fn objective(&self, alpha: &[f64], beta: f64) -> f64 {
        let a = DVector::from_column_slice(alpha);
        self.objective_v(&a, beta)
    }

    fn objective_v(&self, alpha: &DVector<f64>, beta: f64) -> f64 {
        self.smoothed(alpha, beta, 0.0)
    }

    /// Objective with the norm replaced by `sqrt(‖·‖² + ε²)`.
    fn smoothed(&self, alpha: &DVector<f64>, beta: f64, eps: f64) -> f64 {
        self.tau * alpha.sum() + self.tau * beta * self.cap - (self.norm_sq(alpha, beta) + eps * eps).sqrt()
    }

    /// Gradient in `α` of the smoothed objective.
    fn gradient(&self, alpha: &DVector<f64>, beta: f64, eps: f64) -> DVector<f64> {
        let nrm = (self.norm_sq(alpha, beta) + eps * eps).sqrt();
        let ones = DVector::from_element(alpha.len(), self.tau);
        if nrm > 0.0 {
            ones - (&self.q * alpha + &self.yp * (beta * self.tau)) / nrm
        } else {
            ones
        }
    }

    /// Maximizer over `β ≥ 0` of the smoothed objective for fixed `α`.
    ///
    /// With `s = βτ`, `B = Σ α_i y_i f_prev(x_i)` and `D = αᵀQα − B² + ε²`
    /// the objective is `c·s − sqrt(D + (s + B)²)` plus terms free of `s`,
    /// stationary at `s + B = c·sqrt(D / (1 − c²))`.
    fn best_beta(&self, alpha: &DVector<f64>, eps: f64) -> f64 {
        let c = self.cap;
        if c <= -1.0 {
            return 0.0;
        }
        let b = alpha.dot(&self.yp);
        let d = (alpha.dot(&(&self.q * alpha)) - b * b).max(0.0) + eps * eps;
        let s = c * (d / (1.0 - c * c)).sqrt() - b;
        s.max(0.0) / self.tau
    }
}

fn check_psd(gram: &DMatrix<f64>) -> Result<()> {
    let m = gram.nrows();
    let scale = gram.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    for i in 0..m {
        for j in 0..i {
            if (gram[(i, j)] - gram[(j, i)]).abs() > 1e-9 * scale {
                return Err(Error::InvalidKernel(format!("asymmetric at ({i},{j})")));
            }
        }
    }
    if gram.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidKernel("non-finite entry".into()));
    }
    let min_eig = gram
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b));
    if min_eig < -1e-8 * scale * m as f64 {
        return Err(Error::InvalidKernel(format!("minimum eigenvalue {min_eig}")));
    }
    Ok(())
}

/// Smoothing levels of [`kernel_dual_solve`], relative to `τ`.
const SMOOTHING: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Projected gradient ascent with step halving on the localized hinge dual.
///
/// `β` enters through a narrow ridge when the radius is small, so it is set
/// to its exact maximizer after every `α` step and the ascent runs over `α`
/// alone. The norm is smoothed to `sqrt(‖·‖² + ε²)` with `ε` shrinking over
/// warm-started stages: the exact norm has kinks where ascent stalls, and
/// where the primal optimum lies strictly inside the unit ball the exact dual
/// vector vanishes and carries no direction. Each stage's value bounds the
/// exact objective to within `ε`.
///
/// `history` holds the smoothed objective at the start of each stage and
/// after each accepted step; it never decreases. `objective` is exact. Zero
/// loss under the previous hypothesis returns the origin.
pub fn kernel_dual_solve(
    gram: &DMatrix<f64>,
    labels: &[Label],
    prev_values: &[f64],
    tau: f64,
    radius: f64,
    solver: &SolverParams,
) -> Result<DualSolution> {
    solver.validate()?;
    let problem = DualProblem::new(gram, labels, prev_values, tau, radius)?;
    let m = problem.len();
    if problem.yp.iter().all(|&v| v >= tau) {
        return Ok(DualSolution {
            alpha: vec![0.0; m],
            beta: 0.0,
            objective: 0.0,
            history: vec![0.0],
        });
    }
    let mut alpha = DVector::from_element(m, 0.5);
    let mut beta = 0.0;
    let mut history = Vec::new();
    for rel in SMOOTHING {
        let eps = rel * tau;
        beta = problem.best_beta(&alpha, eps);
        let mut value = problem.smoothed(&alpha, beta, eps);
        history.push(value);
        let mut step = 1.0;
        for _ in 0..solver.max_iterations {
            let ga = problem.gradient(&alpha, beta, eps);
            let mut accepted = false;
            while step > 1e-14 {
                let mut na = &alpha + &ga * step;
                na.iter_mut().for_each(|a| *a = a.clamp(0.0, 1.0));
                if (&na - &alpha).norm() / step <= solver.tolerance {
                    // projected gradient vanishes: stationary
                    break;
                }
                let nb = problem.best_beta(&na, eps);
                let nv = problem.smoothed(&na, nb, eps);
                if !nv.is_finite() {
                    return Err(Error::Numerical("dual objective is not finite".into()));
                }
                if nv >= value {
                    alpha = na;
                    beta = nb;
                    value = nv;
                    history.push(value);
                    accepted = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
    }
    let objective = problem.objective_v(&alpha, beta);
    Ok(DualSolution {
        alpha: alpha.iter().copied().collect(),
        beta,
        objective,
        history,
    })
}

/// New hypothesis along `Σ α_i y_i Φ(x_i) + β·τ·w_prev`, unit-normalized.
///
/// `sample` pairs each dual variable with its sensor index, point and label.
/// Without a previous hypothesis only the sample terms are used.
pub fn kernel_primal_recover(
    alpha: &[f64],
    beta: f64,
    sample: &[(usize, Point, Label)],
    prev: Option<&KernelHypothesis>,
    tau: f64,
    kernel: KernelSpec,
) -> Result<KernelHypothesis> {
    if alpha.len() != sample.len() {
        return Err(Error::LengthMismatch {
            expected: sample.len(),
            found: alpha.len(),
        });
    }
    let mut terms: Vec<(usize, Point, f64)> = Vec::new();
    if let Some(p) = prev {
        if beta > 0.0 {
            terms.extend(p.terms().map(|(i, x, c)| (i, x, c * beta * tau)));
        }
    }
    for (a, (i, x, y)) in alpha.iter().zip(sample) {
        if *a > 0.0 {
            terms.push((*i, x.clone(), a * y.as_f64()));
        }
    }
    KernelHypothesis::new(terms, kernel)
}

/// Kernel counterpart of the linear initial hypothesis: the unit-ball τ = 1
/// hinge optimum `Σ y_i Φ(x_i)`, normalized. Requires `k(x, x) ≤ 1`.
fn initial_kernel_hypothesis(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    m0: usize,
    kernel: KernelSpec,
    seed: u64,
) -> Result<KernelHypothesis> {
    let (idx, sample) = initial_sample(oracle, positions, m0, seed)?;
    KernelHypothesis::new(
        idx.into_iter()
            .zip(sample)
            .map(|(i, (p, y))| (i, p, y.as_f64())),
        kernel,
    )
}

/// Localized active learning in the kernel space.
///
/// The band in round `k` is `{i : |f_k(x_i)| ≤ b_k}`. A round whose dual
/// optimum is the origin (zero loss reachable without moving) keeps the
/// current hypothesis.
pub fn kernel_active_learn(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    config: &ActiveConfig,
    kernel: KernelSpec,
    seed: u64,
) -> Result<KernelHypothesis> {
    config.validate()?;
    if oracle.remaining() < config.label_cost() {
        return Err(Error::BudgetExceeded);
    }
    let mut h = initial_kernel_hypothesis(
        oracle,
        positions,
        config.initial_sample,
        kernel,
        seed::child(seed, INITIAL_STREAM),
    )?;
    let mut rng = seed::rng(seed::child(seed, ROUND_STREAM));
    for k in 1..=config.rounds {
        let scores: Vec<f64> = positions
            .iter()
            .map(|p| h.decision_value(p.coords()))
            .collect();
        let band = band_members(config.band(k), |i| scores[i], positions.len())?;
        let (picked, sample) =
            query_band(oracle, positions, &band, config.labels_per_round, &mut rng)?;
        let pts: Vec<&Point> = sample.iter().map(|(p, _)| p).collect();
        let gram = kernel.gram(&pts);
        let labels: Vec<Label> = sample.iter().map(|(_, y)| *y).collect();
        let prev_values: Vec<f64> = picked.iter().map(|&i| scores[i]).collect();
        let tau = config.hinge_scale(k);
        let dual = kernel_dual_solve(
            &gram,
            &labels,
            &prev_values,
            tau,
            config.radius(k),
            &config.solver,
        )?;
        let triples: Vec<(usize, Point, Label)> = picked
            .into_iter()
            .zip(sample)
            .map(|(i, (p, y))| (i, p, y))
            .collect();
        match kernel_primal_recover(&dual.alpha, dual.beta, &triples, Some(&h), tau, kernel) {
            Ok(next) => h = next,
            Err(Error::DegenerateSolution) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_kernel_values() {
        let k = KernelSpec::gaussian(0.1).unwrap();
        assert_eq!(k.eval(&[0.2, 0.3], &[0.2, 0.3]), 1.0);
        let v = k.eval(&[0.0, 0.0], &[0.1, 0.0]);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!(KernelSpec::gaussian(0.0).is_err());
    }

    #[test]
    fn non_psd_gram_is_rejected() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let err = kernel_dual_solve(
            &g,
            &[Label::Positive, Label::Negative],
            &[0.0, 0.0],
            0.1,
            0.5,
            &SolverParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidKernel(_)));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.1, 1.0]);
        assert!(DualProblem::new(&asym, &[Label::Positive; 2], &[0.0; 2], 0.1, 0.5).is_err());
    }

    #[test]
    fn pure_previous_direction() {
        let k = KernelSpec::gaussian(0.3).unwrap();
        let prev = KernelHypothesis::new(
            vec![(3, pt(&[0.1, 0.1]), 1.0), (7, pt(&[-0.4, 0.2]), -0.5)],
            k,
        )
        .unwrap();
        let sample = vec![(9, pt(&[0.0, 0.5]), Label::Positive)];
        let out = kernel_primal_recover(&[0.0], 2.0, &sample, Some(&prev), 0.1, k).unwrap();
        assert_eq!(out.support_indices(), prev.support_indices());
        for (a, b) in out.coefficients().iter().zip(prev.coefficients()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_support_recovery() {
        let k = KernelSpec::gaussian(0.1).unwrap();
        let sample = vec![(4, pt(&[0.3, -0.2]), Label::Negative)];
        let h = kernel_primal_recover(&[1.0], 0.0, &sample, None, 0.1, k).unwrap();
        assert_eq!(h.support_indices(), &[4]);
        assert!((h.coefficients()[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_dual_is_degenerate() {
        let k = KernelSpec::Linear;
        let sample = vec![(0, pt(&[0.3, -0.2]), Label::Negative)];
        assert!(matches!(
            kernel_primal_recover(&[0.0], 0.0, &sample, None, 0.1, k),
            Err(Error::DegenerateSolution)
        ));
    }

    #[test]
    fn duplicate_indices_merge() {
        let h = KernelHypothesis::new(
            vec![(1, pt(&[0.5]), 1.0), (1, pt(&[0.5]), 2.0)],
            KernelSpec::Linear,
        )
        .unwrap();
        assert_eq!(h.support_indices(), &[1]);
        assert!((h.rkhs_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_has_kernel_header() {
        let h = KernelHypothesis::new(vec![(2, pt(&[0.5, 0.0]), 1.0)], KernelSpec::gaussian(0.1).unwrap())
            .unwrap();
        let csv = h.to_csv();
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# kernel=gaussian bandwidth=1.0"));
        assert_eq!(lines.next(), Some("index,coefficient"));
        assert!(lines.next().unwrap().starts_with("2,1.0"));
    }

    #[test]
    fn dual_iterates_are_feasible_and_monotone() {
        let pts = crate::field::sample_unit_ball(12, 2, 3).unwrap();
        let refs: Vec<&Point> = pts.iter().collect();
        let k = KernelSpec::gaussian(0.5).unwrap();
        let gram = k.gram(&refs);
        let labels: Vec<Label> = pts.iter().map(|p| Label::from_sign(p.coords()[0] + 0.1)).collect();
        let prev: Vec<f64> = pts.iter().map(|p| 0.3 * p.coords()[0]).collect();
        let sol = kernel_dual_solve(&gram, &labels, &prev, 0.05, 0.4, &SolverParams::default())
            .unwrap();
        assert!(sol.alpha.iter().all(|a| (0.0..=1.0).contains(a)));
        assert!(sol.beta >= 0.0);
        assert!(sol.history.windows(2).all(|w| w[1] >= w[0]));
    }
}
