//! Radius-r communication graph and the consensus-game payoff.
//!
//! Adjacency is exact: `j` neighbors `i` iff `‖x_i − x_j‖ ≤ r` and `i ≠ j`.
//! Construction buckets points into a uniform grid whose side is `r` and
//! only compares points in the 3^d surrounding cells.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::csvio::CsvBuf;
use crate::error::{Error, Result};
use crate::field::{Label, Point};

/// Euclidean distance test shared by every adjacency computation.
#[inline]
pub fn within_radius(a: &[f64], b: &[f64], r: f64) -> bool {
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    sq.sqrt() <= r
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    radius: f64,
    adjacency: Vec<Vec<usize>>,
}

type CellKey = Vec<i64>;

/// Points bucketed by grid cell, with coordinates stored contiguously in
/// cell order so a candidate scan reads memory sequentially.
struct Grid {
    side: f64,
    dim: usize,
    cells: HashMap<CellKey, (usize, usize)>,
    order: Vec<usize>,
    coords: Vec<f64>,
}

impl Grid {
    fn new(positions: &[Point], r: f64) -> Grid {
        // slightly inflated so points at distance exactly r never end up two
        // cells apart through rounding in the division
        let side = r * (1.0 + 1e-9);
        let dim = positions.first().map_or(0, Point::dim);
        let keys: Vec<CellKey> = positions.iter().map(|p| Self::key(side, p.coords())).collect();
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by(|&a, &b| keys[a].cmp(&keys[b]).then(a.cmp(&b)));
        let mut cells = HashMap::new();
        let mut start = 0;
        for k in 1..=order.len() {
            if k == order.len() || keys[order[k]] != keys[order[start]] {
                cells.insert(keys[order[start]].clone(), (start, k));
                start = k;
            }
        }
        let coords = order.iter().flat_map(|&i| positions[i].coords().iter().copied()).collect();
        Grid {
            side,
            dim,
            cells,
            order,
            coords,
        }
    }

    fn key(side: f64, x: &[f64]) -> CellKey {
        x.iter().map(|c| (c / side).floor() as i64).collect()
    }

    /// Calls `f(j, x_j)` for every point in the 3^d cells around `x`.
    fn for_each_candidate(&self, x: &[f64], mut f: impl FnMut(usize, &[f64])) {
        let center = Self::key(self.side, x);
        let d = center.len();
        let mut offset = vec![-1i64; d];
        let mut probe = center.clone();
        loop {
            for k in 0..d {
                probe[k] = center[k] + offset[k];
            }
            if let Some(&(lo, hi)) = self.cells.get(&probe) {
                let block = &self.coords[lo * self.dim..hi * self.dim];
                for (j, c) in self.order[lo..hi].iter().zip(block.chunks_exact(self.dim)) {
                    f(*j, c);
                }
            }
            // odometer over {-1,0,1}^d
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }
}

impl NeighborGraph {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    /// Sorted neighbor indices of `i` (self excluded).
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edge list with `i < j`, header `i,j`.
    pub fn edges_csv(&self) -> String {
        let mut buf = CsvBuf::new(&["i", "j"]);
        for (i, nbrs) in self.adjacency.iter().enumerate() {
            for &j in nbrs.iter().filter(|&&j| j > i) {
                buf.row(&[i.to_string(), j.to_string()]);
            }
        }
        buf.into_string()
    }

    pub fn write_edges_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.edges_csv()).map_err(|e| Error::io(path, e))
    }

    fn check_labels(&self, labels: &[Label]) -> Result<()> {
        if labels.len() != self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                found: labels.len(),
            });
        }
        Ok(())
    }

    /// Sum of neighbor labels as ±1 integers.
    pub(crate) fn neighbor_sum(&self, labels: &[Label], i: usize) -> i64 {
        self.adjacency[i]
            .iter()
            .map(|&j| labels[j].as_i32() as i64)
            .sum()
    }
}

/// Builds the exact closed-ball adjacency over `positions`.
pub fn build_graph(positions: &[Point], r: f64) -> Result<NeighborGraph> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidRadius(r));
    }
    if let Some(first) = positions.first() {
        let d = first.dim();
        if let Some(bad) = positions.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
    }
    let grid = Grid::new(positions, r);
    let adjacency = match grid.dim {
        1 => neighbor_lists::<1>(&grid, positions, r),
        2 => neighbor_lists::<2>(&grid, positions, r),
        3 => neighbor_lists::<3>(&grid, positions, r),
        _ => neighbor_lists::<0>(&grid, positions, r),
    };
    Ok(NeighborGraph {
        radius: r,
        adjacency,
    })
}

/// Adjacency lists with the distance loop unrolled for `D` dimensions;
/// `D = 0` handles any dimension.
fn neighbor_lists<const D: usize>(grid: &Grid, positions: &[Point], r: f64) -> Vec<Vec<usize>> {
    // squared-distance screen; only near-boundary pairs pay for the exact test
    let (inside, outside) = (r * r * (1.0 - 1e-9), r * r * (1.0 + 1e-9));
    positions
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let x = p.coords();
            let mut nbrs = Vec::new();
            grid.for_each_candidate(x, |j, c| {
                let sq: f64 = if D == 0 {
                    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
                } else {
                    (0..D).map(|k| (x[k] - c[k]) * (x[k] - c[k])).sum()
                };
                let near = sq <= inside || (sq <= outside && within_radius(x, c, r));
                if near && j != i {
                    nbrs.push(j);
                }
            });
            // one ascending run per cell; the stable sort merges runs
            nbrs.sort();
            nbrs
        })
        .collect()
}

/// Correlation of sensor `i` with its neighbors: (agree − disagree) / m_i,
/// or 1 for an isolated sensor.
pub fn payoff(graph: &NeighborGraph, labels: &[Label], i: usize) -> Result<f64> {
    graph.check_labels(labels)?;
    if i >= graph.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            len: graph.len(),
        });
    }
    Ok(payoff_unchecked(graph, labels, i))
}

fn payoff_unchecked(graph: &NeighborGraph, labels: &[Label], i: usize) -> f64 {
    let m = graph.degree(i);
    if m == 0 {
        return 1.0;
    }
    let agreement = graph.neighbor_sum(labels, i) * labels[i].as_i32() as i64;
    agreement as f64 / m as f64
}

/// Largest payoff gain any single sensor could get by flipping its label.
///
/// A labeling is an ε-equilibrium iff the result is at most ε.
pub fn max_deviation_incentive(graph: &NeighborGraph, labels: &[Label]) -> Result<f64> {
    graph.check_labels(labels)?;
    Ok((0..graph.len())
        .into_par_iter()
        .map(|i| (-2.0 * payoff_unchecked(graph, labels, i)).max(0.0))
        .reduce(|| 0.0, f64::max))
}
