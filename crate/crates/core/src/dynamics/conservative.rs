//! Conservative best-response.
//!
//! A sensor adopts a label only when every sufficiently balanced hyperplane
//! through its own location leaves a strict majority of that label on both
//! sides. Hyperplanes with fewer than a quarter of the neighborhood on either
//! side are ignored. In the plane the set of distinct splits is enumerated
//! exactly with an angular sweep; in higher dimensions a fixed budget of
//! random directions is tested instead, which checks fewer separators and so
//! can only flip more often than the exact rule.

use std::f64::consts::{PI, TAU};

use crate::field::{random_unit_vector, Label, Point};
use crate::graph::NeighborGraph;
use crate::seed;

const DIRECTION_STREAM: u64 = 0xC0_5E_4B_A7;

#[derive(Debug, Default, Clone, Copy)]
struct Side {
    pos: usize,
    neg: usize,
}

impl Side {
    fn add(&mut self, l: Label) {
        match l {
            Label::Positive => self.pos += 1,
            Label::Negative => self.neg += 1,
        }
    }

    fn len(self) -> usize {
        self.pos + self.neg
    }

    fn minus(self, other: Side) -> Side {
        Side {
            pos: self.pos - other.pos,
            neg: self.neg - other.neg,
        }
    }
}

/// Running verdict over all considered splits.
struct Verdict {
    m: usize,
    considered: bool,
    all_positive: bool,
    all_negative: bool,
}

impl Verdict {
    fn new(m: usize) -> Verdict {
        Verdict {
            m,
            considered: false,
            all_positive: true,
            all_negative: true,
        }
    }

    fn observe(&mut self, a: Side, b: Side) {
        if 4 * a.len() < self.m || 4 * b.len() < self.m {
            return;
        }
        self.considered = true;
        self.all_positive &= a.pos > a.neg && b.pos > b.neg;
        self.all_negative &= a.neg > a.pos && b.neg > b.pos;
    }

    fn settled(&self) -> bool {
        self.considered && !self.all_positive && !self.all_negative
    }

    fn decision(&self) -> Option<Label> {
        if !self.considered {
            None
        } else if self.all_positive {
            Some(Label::Positive)
        } else if self.all_negative {
            Some(Label::Negative)
        } else {
            None
        }
    }
}

/// Label the conservative rule would assign to sensor `i`, or `None` to keep
/// the current one.
pub(crate) fn decide(
    graph: &NeighborGraph,
    positions: &[Point],
    labels: &[Label],
    i: usize,
    direction_budget: usize,
) -> Option<Label> {
    let nbrs = graph.neighbors(i);
    if nbrs.is_empty() {
        return None;
    }
    let center = positions[i].coords();
    let d = center.len();
    // flat row-major offsets; coincident neighbors lie on every separator
    // and belong to no side
    let mut offsets = Offsets {
        d,
        coords: Vec::with_capacity(nbrs.len() * d),
        labels: Vec::with_capacity(nbrs.len()),
    };
    for &j in nbrs {
        let start = offsets.coords.len();
        offsets
            .coords
            .extend(positions[j].coords().iter().zip(center).map(|(a, b)| a - b));
        if offsets.coords[start..].iter().all(|&c| c == 0.0) {
            offsets.coords.truncate(start);
        } else {
            offsets.labels.push(labels[j]);
        }
    }
    let mut verdict = Verdict::new(nbrs.len());
    match d {
        1 => line_split(&offsets, &mut verdict),
        2 => angular_sweep(&offsets, &mut verdict),
        _ => sampled_splits(&offsets, i, direction_budget, &mut verdict),
    }
    verdict.decision()
}

struct Offsets {
    d: usize,
    coords: Vec<f64>,
    labels: Vec<Label>,
}

impl Offsets {
    fn iter(&self) -> impl Iterator<Item = (&[f64], Label)> + '_ {
        self.coords.chunks_exact(self.d).zip(self.labels.iter().copied())
    }

    fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn totals(offsets: &Offsets) -> Side {
    let mut all = Side::default();
    offsets.labels.iter().for_each(|l| all.add(*l));
    all
}

fn line_split(offsets: &Offsets, verdict: &mut Verdict) {
    let mut left = Side::default();
    offsets
        .iter()
        .filter(|(v, _)| v[0] < 0.0)
        .for_each(|(_, l)| left.add(l));
    verdict.observe(left, totals(offsets).minus(left));
}

fn angular_sweep(offsets: &Offsets, verdict: &mut Verdict) {
    if offsets.is_empty() {
        return;
    }
    let all = totals(offsets);
    let mut pts: Vec<(f64, Label)> = offsets
        .iter()
        .map(|(v, l)| (v[1].atan2(v[0]).rem_euclid(TAU), l))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));

    // the open half-plane (ψ, ψ+π) changes membership only when ψ crosses
    // φ or φ−π for some neighbor angle φ
    let mut events: Vec<f64> = pts
        .iter()
        .flat_map(|&(a, _)| [a, (a + PI).rem_euclid(TAU)])
        .collect();
    events.sort_by(f64::total_cmp);
    events.dedup();

    let e = events.len();
    let mut candidates: Vec<f64> = events.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let wrap = 0.5 * (events[e - 1] + events[0] + TAU);
    if wrap >= TAU {
        candidates.insert(0, wrap - TAU);
    } else {
        candidates.push(wrap);
    }

    // doubled angle list so every arc is a contiguous window
    let m = pts.len();
    let angle = |k: usize| if k < m { pts[k].0 } else { pts[k - m].0 + TAU };
    let mut prefix = Vec::with_capacity(2 * m + 1);
    prefix.push(Side::default());
    for k in 0..2 * m {
        let mut next = prefix[k];
        next.add(pts[k % m].1);
        prefix.push(next);
    }

    let (mut lo, mut hi) = (0usize, 0usize);
    for psi in candidates {
        while lo < 2 * m && angle(lo) <= psi {
            lo += 1;
        }
        if hi < lo {
            hi = lo;
        }
        while hi < 2 * m && angle(hi) < psi + PI {
            hi += 1;
        }
        let arc = prefix[hi].minus(prefix[lo]);
        verdict.observe(arc, all.minus(arc));
        if verdict.settled() {
            return;
        }
    }
}

fn sampled_splits(
    offsets: &Offsets,
    i: usize,
    budget: usize,
    verdict: &mut Verdict,
) {
    let d = offsets.d;
    let mut rng = seed::rng(seed::derive(DIRECTION_STREAM, &[d as u64, i as u64]));
    for _ in 0..budget {
        let u = random_unit_vector(d, &mut rng);
        let mut a = Side::default();
        let mut b = Side::default();
        for (v, l) in offsets.iter() {
            let s: f64 = v.iter().zip(&u).map(|(x, y)| x * y).sum();
            if s > 0.0 {
                a.add(l);
            } else if s < 0.0 {
                b.add(l);
            }
        }
        verdict.observe(a, b);
        if verdict.settled() {
            return;
        }
    }
}
