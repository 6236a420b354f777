//! Margin-based active learning of a linear separator through the origin.

use rand::seq::index;

use super::{ActiveConfig, LabelOracle, LinearHypothesis, Sample, SolverParams};
use crate::error::{Error, Result};
use crate::field::{dot, norm, Label, Point};
use crate::seed;

const INITIAL_STREAM: u64 = 1;
const ROUND_STREAM: u64 = 2;
const BAND_WIDENINGS: usize = 4;

/// Mean of `max(0, 1 − y(w·x)/τ)` and one of its subgradients.
///
/// At a kink the zero branch is taken.
pub fn hinge_loss(w: &[f64], sample: &[(Point, Label)], tau: f64) -> Result<(f64, Vec<f64>)> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(tau > 0.0) {
        return Err(Error::Config(format!("hinge scale must be positive, got {tau}")));
    }
    let mut value = 0.0;
    let mut grad = vec![0.0; w.len()];
    for (x, y) in sample {
        let x = x.coords();
        if x.len() != w.len() {
            return Err(Error::DimensionMismatch {
                expected: w.len(),
                found: x.len(),
            });
        }
        let y = y.as_f64();
        let slack = 1.0 - y * dot(w, x) / tau;
        if slack > 0.0 {
            value += slack;
            for (g, xi) in grad.iter_mut().zip(x) {
                *g -= y * xi / tau;
            }
        }
    }
    let m = sample.len() as f64;
    grad.iter_mut().for_each(|g| *g /= m);
    Ok((value / m, grad))
}

fn project_to_ball(v: &mut [f64], center: &[f64], radius: f64) {
    let offset: Vec<f64> = v.iter().zip(center).map(|(a, b)| a - b).collect();
    let dist = norm(&offset);
    if dist > radius {
        let s = radius / dist;
        for ((vi, ci), oi) in v.iter_mut().zip(center).zip(&offset) {
            *vi = ci + s * oi;
        }
    }
}

/// Euclidean projection onto the spherical cap
/// `{v : ‖v‖ ≤ 1, v·center ≥ 1 − radius²/2}` for a unit `center`.
///
/// The cap agrees with `B(center, radius)` on the unit sphere and lies inside
/// it everywhere else.
fn project_to_cap(v: &mut [f64], center: &[f64], radius: f64) {
    let h = 1.0 - radius * radius / 2.0;
    if norm(v) <= 1.0 && dot(v, center) >= h {
        return;
    }
    let n = norm(v);
    if n > 1.0 && dot(v, center) >= h * n {
        v.iter_mut().for_each(|x| *x /= n);
        return;
    }
    let shift = h - dot(v, center);
    let mut p: Vec<f64> = v.iter().zip(center).map(|(x, c)| x + shift.max(0.0) * c).collect();
    if norm(&p) <= 1.0 {
        v.copy_from_slice(&p);
        return;
    }
    // nearest point on the rim {‖v‖ = 1, v·center = h}
    let rho = (1.0 - h * h).max(0.0).sqrt();
    let along = dot(v, center);
    p = v.iter().zip(center).map(|(x, c)| x - along * c).collect();
    let pn = norm(&p);
    if pn > 0.0 {
        p.iter_mut().for_each(|x| *x /= pn);
    } else {
        // v is on the axis: every rim point is nearest
        p = orthogonal_unit(center);
    }
    for ((vi, ci), ui) in v.iter_mut().zip(center).zip(&p) {
        *vi = h * ci + rho * ui;
    }
}

fn orthogonal_unit(c: &[f64]) -> Vec<f64> {
    let k = (0..c.len())
        .min_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .unwrap_or(0);
    let mut e = vec![0.0; c.len()];
    e[k] = 1.0;
    let cc = dot(c, c);
    let t = dot(&e, c) / cc;
    let mut u: Vec<f64> = e.iter().zip(c).map(|(x, ci)| x - t * ci).collect();
    let un = norm(&u);
    u.iter_mut().for_each(|x| *x /= un);
    u
}

/// Projected subgradient descent on the scaled hinge over
/// `{v : ‖v − center‖ ≤ radius}`, starting from `center`.
///
/// Steps are `step_size·radius/√t` along the normalized subgradient; the
/// best iterate and its loss are returned without normalization.
pub fn minimize_hinge_in_ball(
    center: &[f64],
    sample: &[(Point, Label)],
    tau: f64,
    radius: f64,
    solver: &SolverParams,
) -> Result<(Vec<f64>, f64)> {
    minimize_hinge(center, sample, tau, radius, solver, |v| project_to_ball(v, center, radius))
}

/// As [`minimize_hinge_in_ball`] over the cap of the unit ball within
/// `radius` of the unit vector `center`.
pub fn minimize_hinge_in_cap(
    center: &[f64],
    sample: &[(Point, Label)],
    tau: f64,
    radius: f64,
    solver: &SolverParams,
) -> Result<(Vec<f64>, f64)> {
    minimize_hinge(center, sample, tau, radius, solver, |v| project_to_cap(v, center, radius))
}

fn minimize_hinge(
    center: &[f64],
    sample: &[(Point, Label)],
    tau: f64,
    radius: f64,
    solver: &SolverParams,
    project: impl Fn(&mut [f64]),
) -> Result<(Vec<f64>, f64)> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidRadius(radius));
    }
    solver.validate()?;
    let mut v = center.to_vec();
    let (mut loss, mut grad) = hinge_loss(&v, sample, tau)?;
    let mut best = (v.clone(), loss);
    for t in 1..=solver.max_iterations {
        if best.1 <= solver.tolerance {
            break;
        }
        let gn = norm(&grad);
        if gn == 0.0 {
            // zero is a valid subgradient, so v is optimal
            break;
        }
        let step = solver.step_size * radius / (t as f64).sqrt();
        for (vi, gi) in v.iter_mut().zip(&grad) {
            *vi -= step * gi / gn;
        }
        project(&mut v);
        (loss, grad) = hinge_loss(&v, sample, tau)?;
        if !loss.is_finite() {
            return Err(Error::Numerical(format!("hinge loss diverged at iteration {t}")));
        }
        if loss < best.1 {
            best = (v.clone(), loss);
        }
    }
    Ok(best)
}

/// Hinge minimization within `radius` of `w_prev`, normalized to a unit
/// separator.
///
/// The search is over the unit-ball cap `{‖v‖ ≤ 1, v·w_prev ≥ 1 − radius²/2}`,
/// which lies inside the ball `‖v − w_prev‖ ≤ radius` and meets it on the unit
/// sphere. This is the same program the kernel learner solves in its dual, so
/// the two learners coincide under a linear kernel.
pub fn solve_constrained(
    w_prev: &LinearHypothesis,
    sample: &[(Point, Label)],
    tau: f64,
    radius: f64,
    solver: &SolverParams,
) -> Result<LinearHypothesis> {
    let (v, _) = minimize_hinge_in_cap(w_prev.weight(), sample, tau, radius, solver)?;
    LinearHypothesis::new(v)
}

fn query_indices(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    indices: impl IntoIterator<Item = usize>,
) -> Result<Sample> {
    indices
        .into_iter()
        .map(|i| Ok((positions[i].clone(), oracle.query(i)?)))
        .collect()
}

/// Queries `m0` distinct uniformly chosen sensors.
pub(crate) fn initial_sample(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    m0: usize,
    seed: u64,
) -> Result<(Vec<usize>, Sample)> {
    if m0 == 0 {
        return Err(Error::EmptySample);
    }
    if oracle.remaining() < m0 {
        return Err(Error::BudgetExceeded);
    }
    if m0 > positions.len() {
        return Err(Error::Config(format!(
            "initial sample {m0} exceeds {} sensors",
            positions.len()
        )));
    }
    let mut rng = seed::rng(seed);
    let idx: Vec<usize> = index::sample(&mut rng, positions.len(), m0).into_vec();
    let sample = query_indices(oracle, positions, idx.iter().copied())?;
    Ok((idx, sample))
}

/// First hypothesis: τ = 1 hinge minimization over the unit ball on `m0`
/// uniformly drawn sensors, normalized.
///
/// Within the unit ball every margin is at most 1, so the optimum points
/// along the label-weighted sum of the sample, computed directly.
pub fn initial_hypothesis(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    m0: usize,
    seed: u64,
) -> Result<LinearHypothesis> {
    let (_, sample) = initial_sample(oracle, positions, m0, seed)?;
    let d = sample[0].0.dim();
    let mut v = vec![0.0; d];
    for (x, y) in &sample {
        for (vi, xi) in v.iter_mut().zip(x.coords()) {
            *vi += y.as_f64() * xi;
        }
    }
    LinearHypothesis::new(v)
}

/// Sensors within `width` of the separator, widening up to four times.
pub(crate) fn band_members(
    width: f64,
    score: impl Fn(usize) -> f64,
    n: usize,
) -> Result<Vec<usize>> {
    let mut b = width;
    for attempt in 0..=BAND_WIDENINGS {
        let band: Vec<usize> = (0..n).filter(|&i| score(i).abs() <= b).collect();
        if !band.is_empty() {
            return Ok(band);
        }
        if attempt < BAND_WIDENINGS {
            b *= 2.0;
        }
    }
    Err(Error::EmptyBand { width: b })
}

/// Draws up to `m` band members without replacement and queries them.
pub(crate) fn query_band(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    band: &[usize],
    m: usize,
    rng: &mut seed::Rng,
) -> Result<(Vec<usize>, Sample)> {
    let take = m.min(band.len());
    let picked: Vec<usize> = index::sample(rng, band.len(), take)
        .into_iter()
        .map(|k| band[k])
        .collect();
    let sample = query_indices(oracle, positions, picked.iter().copied())?;
    Ok((picked, sample))
}

/// Runs the localized active learner and returns the final separator.
pub fn active_learn(
    oracle: &mut LabelOracle<'_>,
    positions: &[Point],
    config: &ActiveConfig,
    seed: u64,
) -> Result<LinearHypothesis> {
    config.validate()?;
    if oracle.remaining() < config.label_cost() {
        return Err(Error::BudgetExceeded);
    }
    let mut w = initial_hypothesis(
        oracle,
        positions,
        config.initial_sample,
        seed::child(seed, INITIAL_STREAM),
    )?;
    let mut rng = seed::rng(seed::child(seed, ROUND_STREAM));
    for k in 1..=config.rounds {
        let band = band_members(
            config.band(k),
            |i| dot(w.weight(), positions[i].coords()),
            positions.len(),
        )?;
        let (_, sample) = query_band(oracle, positions, &band, config.labels_per_round, &mut rng)?;
        w = solve_constrained(
            &w,
            &sample,
            config.hinge_scale(k),
            config.radius(k),
            &config.solver,
        )?;
    }
    Ok(w)
}
