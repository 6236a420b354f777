//! Sensor positions, target concepts and the two label corruptions.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::csvio::{fmt_f64, CsvBuf};
use crate::error::{Error, Result};
use crate::graph::NeighborGraph;
use crate::seed;

const NORM_SLACK: f64 = 1e-12;

/// Binary sensor state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(i8)]
pub enum Label {
    Negative = -1,
    Positive = 1,
}

impl Label {
    /// Sign convention used everywhere: zero maps to `Positive`.
    pub fn from_sign(value: f64) -> Label {
        if value >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn flipped(self) -> Label {
        match self {
            Label::Negative => Label::Positive,
            Label::Positive => Label::Negative,
        }
    }

    pub fn as_i32(self) -> i32 {
        self as i8 as i32
    }

    pub fn as_f64(self) -> f64 {
        self as i8 as f64
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i32())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A location in the closed unit ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Point> {
        if coords.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let n = norm(&coords);
        if !(n <= 1.0 + NORM_SLACK) {
            return Err(Error::OutsideUnitBall(n));
        }
        Ok(Point { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }
}

impl AsRef<[f64]> for Point {
    fn as_ref(&self) -> &[f64] {
        &self.coords
    }
}

fn gaussian_direction(d: usize, rng: &mut seed::Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&v);
        if n > 1e-300 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Draws a uniformly random unit vector from the generator.
pub fn random_unit_vector(d: usize, rng: &mut seed::Rng) -> Vec<f64> {
    gaussian_direction(d, rng)
}

/// Draws one point uniformly from the unit ball.
pub fn sample_point(d: usize, rng: &mut seed::Rng) -> Point {
    let dir = gaussian_direction(d, rng);
    let u: f64 = rng.random();
    let radius = u.powf(1.0 / d as f64);
    Point {
        coords: dir.into_iter().map(|x| x * radius).collect(),
    }
}

/// `n` i.i.d. uniform points in the `d`-dimensional unit ball.
pub fn sample_unit_ball(n: usize, d: usize, seed: u64) -> Result<Vec<Point>> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = seed::rng(seed);
    Ok((0..n).map(|_| sample_point(d, &mut rng)).collect())
}

/// The concept that defines the noiseless labels.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetConcept {
    /// `sign(w · x)` with unit `w`.
    LinearThroughOrigin { weight: Vec<f64> },
    /// Positive strictly above `x₂ = A·sin(ω·x₁)`; planar only.
    SineBoundary { amplitude: f64, frequency: f64 },
}

impl TargetConcept {
    pub const DEFAULT_SINE_AMPLITUDE: f64 = 0.5;
    pub const DEFAULT_SINE_FREQUENCY: f64 = 2.0 * PI;

    /// Linear target with the given normal; the weight is normalized.
    pub fn linear(weight: Vec<f64>) -> Result<TargetConcept> {
        if weight.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        let n = norm(&weight);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Numerical("target weight must be nonzero".into()));
        }
        Ok(TargetConcept::LinearThroughOrigin {
            weight: weight.into_iter().map(|x| x / n).collect(),
        })
    }

    pub fn sine(amplitude: f64, frequency: f64) -> TargetConcept {
        TargetConcept::SineBoundary {
            amplitude,
            frequency,
        }
    }

    pub fn default_sine() -> TargetConcept {
        Self::sine(Self::DEFAULT_SINE_AMPLITUDE, Self::DEFAULT_SINE_FREQUENCY)
    }

    pub fn dim(&self) -> usize {
        match self {
            TargetConcept::LinearThroughOrigin { weight } => weight.len(),
            TargetConcept::SineBoundary { .. } => 2,
        }
    }

    pub fn linear_weight(&self) -> Option<&[f64]> {
        match self {
            TargetConcept::LinearThroughOrigin { weight } => Some(weight),
            TargetConcept::SineBoundary { .. } => None,
        }
    }

    /// Signed score: `w · x` for linear targets, `x₂ − A·sin(ω·x₁)` for the sine.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(match self {
            TargetConcept::LinearThroughOrigin { weight } => dot(weight, x),
            TargetConcept::SineBoundary {
                amplitude,
                frequency,
            } => x[1] - amplitude * (frequency * x[0]).sin(),
        })
    }

    /// Linear: `sign(w · x)` with `sign(0) = +1`. Sine: positive strictly above the curve.
    pub fn label(&self, x: &[f64]) -> Result<Label> {
        let s = self.score(x)?;
        Ok(match self {
            TargetConcept::LinearThroughOrigin { .. } => Label::from_sign(s),
            TargetConcept::SineBoundary { .. } if s > 0.0 => Label::Positive,
            TargetConcept::SineBoundary { .. } => Label::Negative,
        })
    }
}

/// Uniformly random unit normal through the origin.
pub fn random_linear_target(d: usize, seed: u64) -> Result<TargetConcept> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let mut rng = seed::rng(seed);
    Ok(TargetConcept::LinearThroughOrigin {
        weight: gaussian_direction(d, &mut rng),
    })
}

/// Label of `x` under `target`.
pub fn true_label(target: &TargetConcept, x: &Point) -> Result<Label> {
    target.label(x.coords())
}

fn check_probability(eta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&eta) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(eta))
    }
}

/// N sensors with true and current labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorField {
    dim: usize,
    positions: Vec<Point>,
    true_labels: Vec<Label>,
    current_labels: Vec<Label>,
    target: TargetConcept,
    noise_rate_param: f64,
}

impl SensorField {
    /// Labels every position with the target; current labels start clean.
    pub fn new(positions: Vec<Point>, target: TargetConcept) -> Result<SensorField> {
        let dim = target.dim();
        let true_labels = positions
            .iter()
            .map(|p| target.label(p.coords()))
            .collect::<Result<Vec<_>>>()?;
        Ok(SensorField {
            dim,
            positions,
            current_labels: true_labels.clone(),
            true_labels,
            target,
            noise_rate_param: 0.0,
        })
    }

    /// Samples `n` uniform positions and labels them with `target`.
    pub fn generate(n: usize, target: TargetConcept, seed: u64) -> Result<SensorField> {
        let positions = sample_unit_ball(n, target.dim(), seed)?;
        SensorField::new(positions, target)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn true_labels(&self) -> &[Label] {
        &self.true_labels
    }

    pub fn current_labels(&self) -> &[Label] {
        &self.current_labels
    }

    pub fn target(&self) -> &TargetConcept {
        &self.target
    }

    /// The η used by the last corruption (0 for a clean field).
    pub fn noise_rate_param(&self) -> f64 {
        self.noise_rate_param
    }

    /// Majority margin γ = 1/2 − η; negative when η ≥ 1/2.
    pub fn margin(&self) -> f64 {
        0.5 - self.noise_rate_param
    }

    /// Fraction of sensors whose current label disagrees with the truth.
    pub fn noise_rate(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let wrong = self.incorrect_count();
        wrong as f64 / self.len() as f64
    }

    pub fn incorrect_count(&self) -> usize {
        self.true_labels
            .iter()
            .zip(&self.current_labels)
            .filter(|(t, c)| t != c)
            .count()
    }

    /// Replaces the current labels, e.g. with the result of denoising.
    pub fn with_labels(&self, labels: Vec<Label>) -> Result<SensorField> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: labels.len(),
            });
        }
        Ok(SensorField {
            current_labels: labels,
            ..self.clone()
        })
    }

    /// Flips each label independently with probability `eta`.
    ///
    /// Values of `eta` at or above 1/2 are accepted for testing; they make
    /// [`margin`](Self::margin) non-positive.
    pub fn corrupt_random(&self, eta: f64, seed: u64) -> Result<SensorField> {
        check_probability(eta)?;
        let mut rng = seed::rng(seed);
        let current_labels = self
            .true_labels
            .iter()
            .map(|&t| if rng.random_bool(eta) { t.flipped() } else { t })
            .collect();
        Ok(SensorField {
            current_labels,
            noise_rate_param: eta,
            ..self.clone()
        })
    }

    /// Corrupts whole closed neighborhoods of random seed sensors until at
    /// least an `eta` fraction of sensors is wrong.
    ///
    /// Corrupted sensors are set to the negation of their true label, so
    /// overlapping pockets never cancel.
    pub fn corrupt_pockets(
        &self,
        graph: &NeighborGraph,
        eta: f64,
        seed: u64,
    ) -> Result<SensorField> {
        check_probability(eta)?;
        if graph.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: graph.len(),
            });
        }
        let n = self.len();
        let mut current: Vec<Label> = self.true_labels.clone();
        let mut wrong = 0usize;
        let mut rng = seed::rng(seed);
        let max_picks = 100 * n;
        let mut picks = 0usize;
        let reached = |wrong: usize| n == 0 || wrong as f64 >= eta * n as f64;
        while !reached(wrong) {
            if picks >= max_picks {
                return Err(Error::DegenerateGraph { picks });
            }
            picks += 1;
            let s = rng.random_range(0..n);
            for &i in std::iter::once(&s).chain(graph.neighbors(s)) {
                if current[i] == self.true_labels[i] {
                    current[i] = self.true_labels[i].flipped();
                    wrong += 1;
                }
            }
        }
        Ok(SensorField {
            current_labels: current,
            noise_rate_param: eta,
            ..self.clone()
        })
    }

    /// CSV with header `x0,...,x{d-1},true_label,current_label`.
    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = (0..self.dim).map(|k| format!("x{k}")).collect();
        header.push("true_label".into());
        header.push("current_label".into());
        let mut buf = CsvBuf::new(&header);
        for ((p, t), c) in self
            .positions
            .iter()
            .zip(&self.true_labels)
            .zip(&self.current_labels)
        {
            let mut row: Vec<String> = p.coords().iter().map(|&x| fmt_f64(x)).collect();
            row.push(t.to_string());
            row.push(c.to_string());
            buf.row(&row);
        }
        buf.into_string()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn empty_sample() {
        assert!(sample_unit_ball(0, 2, 1).unwrap().is_empty());
    }

    #[test]
    fn zero_dimension_is_rejected() {
        assert!(matches!(
            sample_unit_ball(3, 0, 1),
            Err(Error::InvalidDimension(0))
        ));
        assert!(random_linear_target(0, 1).is_err());
    }

    #[test]
    fn samples_stay_in_ball() {
        let pts = sample_unit_ball(10_000, 2, 99).unwrap();
        assert!(pts.iter().all(|p| p.norm() <= 1.0 + NORM_SLACK));
    }

    #[test]
    fn inner_disk_holds_a_quarter_of_the_mass() {
        let pts = sample_unit_ball(100_000, 2, 5).unwrap();
        let inner = pts.iter().filter(|p| p.norm() <= 0.5).count() as f64 / 1e5;
        assert!((inner - 0.25).abs() <= 0.01, "{inner}");
    }

    #[test]
    fn one_dimensional_target_is_a_sign() {
        for s in 0..20 {
            let t = random_linear_target(1, s).unwrap();
            let w = t.linear_weight().unwrap()[0];
            assert!(w == 1.0 || w == -1.0);
        }
    }

    #[test]
    fn target_has_unit_norm() {
        let t = random_linear_target(3, 11).unwrap();
        assert!((norm(t.linear_weight().unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planar_targets_are_centered() {
        let mut sum = [0.0; 2];
        for s in 0..10_000 {
            let t = random_linear_target(2, s).unwrap();
            let w = t.linear_weight().unwrap();
            sum[0] += w[0];
            sum[1] += w[1];
        }
        assert!(sum.iter().all(|s| (s / 10_000.0).abs() <= 0.02));
    }

    #[test]
    fn label_examples() {
        let t = TargetConcept::linear(vec![1.0, 0.0]).unwrap();
        assert_eq!(t.label(&[0.3, -0.9]).unwrap(), Label::Positive);
        assert_eq!(t.label(&[0.0, 0.5]).unwrap(), Label::Positive);
        let s = TargetConcept::sine(0.5, PI);
        assert_eq!(s.label(&[0.5, 0.6]).unwrap(), Label::Positive);
        assert_eq!(s.label(&[0.5, 0.4]).unwrap(), Label::Negative);
        assert!(matches!(
            t.label(&[0.1, 0.2, 0.3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn negated_target_negates_labels() {
        let pts = sample_unit_ball(500, 3, 4).unwrap();
        let t = random_linear_target(3, 8).unwrap();
        let neg = TargetConcept::linear(t.linear_weight().unwrap().iter().map(|x| -x).collect())
            .unwrap();
        for p in &pts {
            let (a, b) = (true_label(&t, p).unwrap(), true_label(&neg, p).unwrap());
            if t.score(p.coords()).unwrap() != 0.0 {
                assert_eq!(a, b.flipped());
            }
        }
    }

    #[test]
    fn fresh_field_is_clean() {
        let f = SensorField::generate(1000, random_linear_target(2, 1).unwrap(), 2).unwrap();
        assert_eq!(f.noise_rate(), 0.0);
        assert_eq!(f.true_labels(), f.current_labels());
    }

    #[test]
    fn corrupt_random_extremes() {
        let f = SensorField::generate(1000, random_linear_target(2, 1).unwrap(), 2).unwrap();
        assert_eq!(f.corrupt_random(0.0, 3).unwrap().noise_rate(), 0.0);
        let all = f.corrupt_random(1.0, 3).unwrap();
        assert_eq!(all.noise_rate(), 1.0);
        assert!(all.margin() < 0.0);
        assert!(f.corrupt_random(1.5, 3).is_err());
    }

    #[test]
    fn corrupt_random_concentrates() {
        let f = SensorField::generate(10_000, random_linear_target(2, 1).unwrap(), 2).unwrap();
        for s in 0..5 {
            let rate = f.corrupt_random(0.35, s).unwrap().noise_rate();
            assert!((0.33..=0.37).contains(&rate), "{rate}");
        }
    }

    #[test]
    fn pockets_with_zero_eta_do_nothing() {
        let f = SensorField::generate(200, random_linear_target(2, 1).unwrap(), 2).unwrap();
        let g = build_graph(f.positions(), 0.1).unwrap();
        assert_eq!(f.corrupt_pockets(&g, 0.0, 1).unwrap().noise_rate(), 0.0);
    }

    #[test]
    fn pocket_on_isolated_sensor() {
        let t = TargetConcept::linear(vec![1.0, 0.0]).unwrap();
        let f = SensorField::new(vec![Point::new(vec![0.2, 0.1]).unwrap()], t).unwrap();
        let g = build_graph(f.positions(), 0.1).unwrap();
        let c = f.corrupt_pockets(&g, 0.5, 4).unwrap();
        assert_eq!(c.current_labels()[0], Label::Negative);
        assert_eq!(c.noise_rate(), 1.0);
    }

    #[test]
    fn pockets_overshoot_by_at_most_one_neighborhood() {
        let f = SensorField::generate(10_000, random_linear_target(2, 3).unwrap(), 6).unwrap();
        let g = build_graph(f.positions(), 0.1).unwrap();
        let max_hood = (0..f.len()).map(|i| g.degree(i) + 1).max().unwrap() as f64 / 1e4;
        let rate = f.corrupt_pockets(&g, 0.15, 7).unwrap().noise_rate();
        assert!(rate >= 0.15 && rate <= 0.15 + max_hood, "{rate}");
    }

    #[test]
    fn csv_layout() {
        let t = TargetConcept::linear(vec![1.0, 0.0]).unwrap();
        let f = SensorField::new(vec![Point::new(vec![-0.5, 0.25]).unwrap()], t).unwrap();
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x0,x1,true_label,current_label"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row[0].parse::<f64>().unwrap(), -0.5);
        assert_eq!(&row[2..], &["-1", "-1"]);
    }

    #[test]
    fn point_outside_ball_is_rejected() {
        assert!(matches!(
            Point::new(vec![1.0, 1.0]),
            Err(Error::OutsideUnitBall(_))
        ));
    }
}
