use std::collections::VecDeque;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::generators::lattice_coords;
use super::{Graph, GraphFamily};
use crate::{Error, Result};

/// All-pairs chemical (shortest-path hop) distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceMatrix {
    node_count: usize,
    entries: Vec<u32>,
}

impl DistanceMatrix {
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// `ℓ(k, j)`.
    pub fn get(&self, k: usize, j: usize) -> u32 {
        self.entries[k * self.node_count + j]
    }

    pub fn row(&self, k: usize) -> &[u32] {
        &self.entries[k * self.node_count..(k + 1) * self.node_count]
    }

    pub fn max(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.node_count;
        DMatrix::from_fn(n, n, |k, j| self.get(k, j) as f64)
    }
}

fn bfs(graph: &Graph, source: usize) -> Result<Vec<u32>> {
    let mut dist = vec![u32::MAX; graph.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = 0;
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        for &v in graph.neighbors(u) {
            if dist[v] == u32::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    match dist.iter().position(|&d| d == u32::MAX) {
        Some(unreached) => Err(Error::Disconnected { source_node: source, unreached }),
        None => Ok(dist),
    }
}

/// Breadth-first traversal from every source.
pub fn chemical_distances(graph: &Graph) -> Result<DistanceMatrix> {
    let n = graph.node_count();
    let rows: Vec<Vec<u32>> = (0..n).into_par_iter().map(|s| bfs(graph, s)).collect::<Result<_>>()?;
    Ok(DistanceMatrix { node_count: n, entries: rows.concat() })
}

/// `r_c = (1/N²) Σ_{k,j} ℓ(k, j)`, the saturation value of the classical
/// site-averaged displacement.
pub fn mean_pairwise_distance(dist: &DistanceMatrix) -> f64 {
    let n = dist.node_count();
    if n == 0 {
        return 0.0;
    }
    let total: u64 = dist.entries.iter().map(|&d| d as u64).sum();
    total as f64 / (n * n) as f64
}

/// Euclidean distances between lattice sites, using the minimum image on
/// periodic families. Only defined for tori, rings and chains.
pub fn lattice_euclidean_distances(graph: &Graph) -> Result<DMatrix<f64>> {
    let n = graph.node_count();
    let (d, side, periodic) = match graph.family() {
        GraphFamily::HypercubicTorus { d, side } => (d, side, true),
        GraphFamily::Ring { n } => (1, n, true),
        GraphFamily::Chain { n } => (1, n, false),
        other => {
            return Err(Error::InvalidParameter(format!(
                "{other} has no lattice embedding for Euclidean distances"
            )))
        }
    };
    let coords: Vec<Vec<usize>> = (0..n).map(|i| lattice_coords(i, d, side)).collect();
    Ok(DMatrix::from_fn(n, n, |a, b| {
        coords[a]
            .iter()
            .zip(&coords[b])
            .map(|(&x, &y)| {
                let delta = x.abs_diff(y);
                let delta = if periodic { delta.min(side - delta) } else { delta };
                (delta * delta) as f64
            })
            .sum::<f64>()
            .sqrt()
    }))
}
