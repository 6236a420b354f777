//! Independent oracles shared by the oracle tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::Rng as _;
use sensor_consensus::dynamics::conservative_update;
use sensor_consensus::field::{random_linear_target, sample_unit_ball, Label, Point};
use sensor_consensus::graph::{build_graph, within_radius};
use sensor_consensus::learner::kernel::{kernel_active_learn, kernel_dual_solve, KernelHypothesis};
use sensor_consensus::learner::linear::{active_learn, hinge_loss};
use sensor_consensus::learner::{ActiveConfig, Classifier, KernelSpec, LabelOracle, LinearHypothesis, SolverParams};
use sensor_consensus::metrics::angle_error;
use sensor_consensus::{seed, SensorField};

pub fn pt(c: &[f64]) -> Point {
    Point::new(c.to_vec()).unwrap()
}

pub fn brute_neighbors(points: &[Point], r: f64) -> Vec<Vec<usize>> {
    (0..points.len())
        .map(|i| {
            (0..points.len())
                .filter(|&j| j != i && within_radius(points[i].coords(), points[j].coords(), r))
                .collect()
        })
        .collect()
}

pub fn grid_case() -> impl Strategy<Value = (usize, usize, f64, u64)> {
    (0usize..=1000, 1usize..=3, 0.01f64..0.6, any::<u64>())
}

pub fn check_grid_search((n, d, r, s): (usize, usize, f64, u64)) -> Result<(), TestCaseError> {
    let pts = sample_unit_ball(n, d, s).unwrap();
    let g = build_graph(&pts, r).unwrap();
    let brute = brute_neighbors(&pts, r);
    prop_assert_eq!(g.adjacency(), brute.as_slice());
    Ok(())
}

/// Verdict of the conservative rule over half-planes through the origin,
/// enumerating every combinatorially distinct split by rotating lines through
/// each neighbor by ±δ.
pub fn brute_conservative(offsets: &[[f64; 2]], labels: &[Label], current: Label, m: usize) -> Label {
    let delta = 1e-7;
    let mut considered = false;
    let (mut all_pos, mut all_neg) = (true, true);
    for v in offsets {
        let phi = v[1].atan2(v[0]);
        for base in [phi, phi + PI] {
            for psi in [base - delta, base + delta] {
                let u = [psi.cos(), psi.sin()];
                let (mut a, mut b) = ([0usize; 2], [0usize; 2]);
                for (w, l) in offsets.iter().zip(labels) {
                    let cross = u[0] * w[1] - u[1] * w[0];
                    let k = usize::from(*l == Label::Positive);
                    if cross > 0.0 {
                        a[k] += 1;
                    } else if cross < 0.0 {
                        b[k] += 1;
                    }
                }
                let (na, nb) = (a[0] + a[1], b[0] + b[1]);
                if 4 * na < m || 4 * nb < m {
                    continue;
                }
                considered = true;
                all_pos &= a[1] > a[0] && b[1] > b[0];
                all_neg &= a[0] > a[1] && b[0] > b[1];
            }
        }
    }
    match (considered, all_pos, all_neg) {
        (true, true, _) => Label::Positive,
        (true, _, true) => Label::Negative,
        _ => current,
    }
}

pub fn conservative_case() -> impl Strategy<Value = (usize, f64, f64, u64)> {
    (1usize..=30, 0.0f64..1.0, 0.0f64..TAU, any::<u64>())
}

pub fn check_conservative((m, bias, tilt, s): (usize, f64, f64, u64)) -> Result<(), TestCaseError> {
    let mut rng = seed::rng(s);
    let r = 0.1;
    let mut pts = vec![pt(&[0.0, 0.0])];
    let mut offsets = Vec::new();
    let mut labels = vec![if rng.random_bool(0.5) { Label::Positive } else { Label::Negative }];
    for _ in 0..m {
        let a: f64 = rng.random_range(0.0..TAU);
        let rad = r * rng.random::<f64>().sqrt() * 0.999;
        let v = [rad * a.cos(), rad * a.sin()];
        // labels correlated with a random direction so both verdicts occur
        let side = (a - tilt).sin();
        let p_pos = if side > 0.0 { bias } else { 1.0 - bias };
        offsets.push(v);
        pts.push(pt(&v));
        labels.push(if rng.random_bool(p_pos) { Label::Positive } else { Label::Negative });
    }
    let g = build_graph(&pts, r).unwrap();
    prop_assert_eq!(g.degree(0), m);
    let expected = brute_conservative(&offsets, &labels[1..], labels[0], m);
    let mut got = labels.clone();
    conservative_update(&g, &pts, &mut got, 0, 64).unwrap();
    prop_assert_eq!(got[0], expected);
    Ok(())
}

/// Independent evaluation of the localized dual objective.
pub fn dual_objective(k: &[[f64; 2]; 2], y: [f64; 2], f: [f64; 2], tau: f64, r: f64, a: [f64; 2], b: f64) -> f64 {
    let mut q = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            q += a[i] * a[j] * y[i] * y[j] * k[i][j];
        }
    }
    let cross = 2.0 * b * tau * (a[0] * y[0] * f[0] + a[1] * y[1] * f[1]);
    let nrm = (q + cross + b * b * tau * tau).max(0.0).sqrt();
    tau * (a[0] + a[1]) + tau * b * (1.0 - r * r / 2.0) - nrm
}

pub fn dual_case() -> impl Strategy<Value = (u64, f64, f64)> {
    (any::<u64>(), 0.05f64..0.5, 0.2f64..1.0)
}

/// Two-point dual against a grid over `[0,1]² × [0,3]` at step 0.01.
pub fn check_dual((s, tau, r): (u64, f64, f64)) -> Result<(), TestCaseError> {
    let mut rng = seed::rng(s);
    let kernel = KernelSpec::gaussian(0.5).unwrap();
    let xs: Vec<Point> = sample_unit_ball(3, 2, s).unwrap();
    let labels = [
        if rng.random_bool(0.5) { Label::Positive } else { Label::Negative },
        if rng.random_bool(0.5) { Label::Positive } else { Label::Negative },
    ];
    // previous hypothesis: a unit-norm expansion on a third point
    let prev = KernelHypothesis::new(vec![(2, xs[2].clone(), 1.0)], kernel).unwrap();
    let f = [prev.decision_value(xs[0].coords()), prev.decision_value(xs[1].coords())];
    let k = [
        [kernel.eval(xs[0].coords(), xs[0].coords()), kernel.eval(xs[0].coords(), xs[1].coords())],
        [kernel.eval(xs[1].coords(), xs[0].coords()), kernel.eval(xs[1].coords(), xs[1].coords())],
    ];
    let y = [labels[0].as_f64(), labels[1].as_f64()];
    let gram = kernel.gram(&[&xs[0], &xs[1]]);
    let sol = kernel_dual_solve(&gram, &labels, &f, tau, r, &SolverParams::default()).unwrap();
    let mut best = f64::NEG_INFINITY;
    for i in 0..=100 {
        for j in 0..=100 {
            for kb in 0..=300 {
                let v = dual_objective(&k, y, f, tau, r, [i as f64 / 100.0, j as f64 / 100.0], kb as f64 / 100.0);
                best = best.max(v);
            }
        }
    }
    let mine = dual_objective(&k, y, f, tau, r, [sol.alpha[0], sol.alpha[1]], sol.beta);
    prop_assert!((mine - sol.objective).abs() < 1e-9);
    prop_assert!(mine >= best - 1e-2, "solver {} grid {}", mine, best);
    if sol.beta <= 3.0 {
        prop_assert!((mine - best).abs() <= 1e-2, "solver {} grid {}", mine, best);
    }
    Ok(())
}

pub fn labeled(points: Vec<Point>, w: &[f64], flip_every: usize) -> Vec<(Point, Label)> {
    points
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let l = Label::from_sign(w.iter().zip(p.coords()).map(|(a, b)| a * b).sum());
            (p, if flip_every > 0 && i % flip_every == 0 { l.flipped() } else { l })
        })
        .collect()
}

/// Linear-kernel expansion collapsed to its weight vector.
pub fn collapse(kh: &KernelHypothesis) -> LinearHypothesis {
    let d = kh.support_points()[0].dim();
    let mut w = vec![0.0; d];
    for (x, c) in kh.support_points().iter().zip(kh.coefficients()) {
        for (wi, xi) in w.iter_mut().zip(x.coords()) {
            *wi += c * xi;
        }
    }
    LinearHypothesis::new(w).unwrap()
}

/// Largest angle in degrees between the linear learner and the kernel
/// learner with a linear kernel, over `seeds` runs at budget 30.
pub fn linear_kernel_worst_degrees(seeds: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for s in 0..seeds {
        let target = random_linear_target(2, s).unwrap();
        let field = SensorField::generate(10_000, target, s + 50).unwrap();
        let cfg = ActiveConfig::for_budget(2, 30).unwrap();
        let mut o1 = LabelOracle::new(field.current_labels(), 30);
        let lin = active_learn(&mut o1, field.positions(), &cfg, s).unwrap();
        let mut o2 = LabelOracle::new(field.current_labels(), 30);
        let kh = kernel_active_learn(&mut o2, field.positions(), &cfg, KernelSpec::Linear, s).unwrap();
        worst = worst.max(angle_error(&collapse(&kh), &lin).unwrap() * 180.0);
    }
    worst
}

/// Worst relative gap between the hinge subgradient and central differences
/// over `cases` random points away from kinks. The scale floor is 1.
pub fn hinge_fd_worst_relative(cases: usize, s: u64) -> f64 {
    let mut rng = seed::rng(s);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < cases {
        let d = rng.random_range(1..=3);
        let sample = labeled(sample_unit_ball(20, d, rng.random()).unwrap(), &vec![1.0; d], 4);
        let tau = 0.1;
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let h = 1e-6;
        // stay away from kinks: every margin differs from τ by more than the step
        let near_kink = sample.iter().any(|(p, l)| {
            let m: f64 = l.as_f64() * w.iter().zip(p.coords()).map(|(a, b)| a * b).sum::<f64>();
            (m - tau).abs() < 1e-3
        });
        if near_kink {
            continue;
        }
        let (_, g) = hinge_loss(&w, &sample, tau).unwrap();
        for k in 0..d {
            let mut up = w.clone();
            let mut dn = w.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (hinge_loss(&up, &sample, tau).unwrap().0 - hinge_loss(&dn, &sample, tau).unwrap().0) / (2.0 * h);
            worst = worst.max((fd - g[k]).abs() / g[k].abs().max(1.0));
        }
        checked += 1;
    }
    worst
}
