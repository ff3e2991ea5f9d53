//! Graph families, adjacency/Laplacian matrices and chemical distances.

mod distance;
mod generators;

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use distance::{
    chemical_distances, lattice_euclidean_distances, mean_pairwise_distance, DistanceMatrix,
};
pub use generators::{
    build_chain, build_complete, build_cayley_tree, build_dual_sierpinski, build_hypercubic_torus,
    build_ring, build_sierpinski_gasket, SierpinskiGasket,
};

/// Parameterised description of one of the supported graph families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "snake_case")]
pub enum GraphFamily {
    /// Dual Sierpinski Gasket of generation `g >= 1`, `N = 3^g`.
    DualSierpinski { g: u32 },
    /// Cayley tree with coordination `z >= 3` and `shells` shells around the root.
    CayleyTree { z: usize, shells: u32 },
    /// `d`-dimensional hypercubic lattice of side `L >= 3` with periodic boundaries.
    HypercubicTorus {
        d: u32,
        #[serde(rename = "L")]
        side: usize,
    },
    /// Periodic ring of `N >= 3` nodes.
    Ring {
        #[serde(rename = "N")]
        n: usize,
    },
    /// Open chain of `N >= 2` nodes with reflecting ends.
    Chain {
        #[serde(rename = "N")]
        n: usize,
    },
    /// Complete graph on `N >= 2` nodes.
    Complete {
        #[serde(rename = "N")]
        n: usize,
    },
}

impl GraphFamily {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            GraphFamily::DualSierpinski { g } if g < 1 => {
                bad(format!("DSG generation must be >= 1, got {g}"))
            }
            GraphFamily::DualSierpinski { g } if g > 12 => {
                bad(format!("DSG generation {g} is beyond dense desk scale (max 12)"))
            }
            GraphFamily::CayleyTree { z, .. } if z < 3 => {
                bad(format!("Cayley tree coordination must be >= 3, got {z}"))
            }
            GraphFamily::HypercubicTorus { d, .. } if d < 1 => {
                bad("torus dimension must be >= 1".to_string())
            }
            GraphFamily::HypercubicTorus { side, .. } if side <= 2 => bad(format!(
                "torus side must be >= 3 (L = {side} would create double edges)"
            )),
            GraphFamily::Ring { n } if n < 3 => bad(format!("ring needs N >= 3, got {n}")),
            GraphFamily::Chain { n } if n < 2 => bad(format!("chain needs N >= 2, got {n}")),
            GraphFamily::Complete { n } if n < 2 => {
                bad(format!("complete graph needs N >= 2, got {n}"))
            }
            _ => {
                // Guard the closed-form size against overflow.
                self.checked_size()
                    .map(|_| ())
                    .ok_or_else(|| Error::InvalidParameter(format!("{self} is too large")))
            }
        }
    }

    fn checked_size(&self) -> Option<usize> {
        match *self {
            GraphFamily::DualSierpinski { g } => 3usize.checked_pow(g),
            GraphFamily::CayleyTree { z, shells } => {
                // [z (z-1)^M - 2] / (z - 2)
                let pow = (z - 1).checked_pow(shells)?;
                let top = z.checked_mul(pow)?.checked_sub(2)?;
                Some(top / (z - 2))
            }
            GraphFamily::HypercubicTorus { d, side } => side.checked_pow(d),
            GraphFamily::Ring { n } | GraphFamily::Chain { n } | GraphFamily::Complete { n } => {
                Some(n)
            }
        }
    }

    /// Closed-form node count of the family.
    pub fn expected_size(&self) -> Result<usize> {
        self.validate()?;
        Ok(self.checked_size().expect("validated"))
    }

    /// Build the graph described by this family.
    pub fn build(&self) -> Result<Graph> {
        self.validate()?;
        match *self {
            GraphFamily::DualSierpinski { g } => build_dual_sierpinski(g),
            GraphFamily::CayleyTree { z, shells } => build_cayley_tree(z, shells),
            GraphFamily::HypercubicTorus { d, side } => build_hypercubic_torus(d, side),
            GraphFamily::Ring { n } => build_ring(n),
            GraphFamily::Chain { n } => build_chain(n),
            GraphFamily::Complete { n } => build_complete(n),
        }
    }

    /// Short family identifier used on the command line and in file headers.
    pub fn short_name(&self) -> &'static str {
        match self {
            GraphFamily::DualSierpinski { .. } => "dsg",
            GraphFamily::CayleyTree { .. } => "ct",
            GraphFamily::HypercubicTorus { .. } => "torus",
            GraphFamily::Ring { .. } => "ring",
            GraphFamily::Chain { .. } => "chain",
            GraphFamily::Complete { .. } => "complete",
        }
    }

    /// Whether every node is equivalent under a graph automorphism.
    pub fn is_vertex_transitive(&self) -> bool {
        matches!(
            self,
            GraphFamily::HypercubicTorus { .. } | GraphFamily::Ring { .. } | GraphFamily::Complete { .. }
        )
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphFamily::DualSierpinski { g } => write!(f, "dsg g={g}"),
            GraphFamily::CayleyTree { z, shells } => write!(f, "ct z={z} shells={shells}"),
            GraphFamily::HypercubicTorus { d, side } => write!(f, "torus d={d} L={side}"),
            GraphFamily::Ring { n } => write!(f, "ring N={n}"),
            GraphFamily::Chain { n } => write!(f, "chain N={n}"),
            GraphFamily::Complete { n } => write!(f, "complete N={n}"),
        }
    }
}

/// Undirected, unweighted, connected graph with a dense adjacency table.
///
/// Instances are immutable once built; every constructor checks symmetry,
/// the zero diagonal, connectedness and the family's closed-form size.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    family: GraphFamily,
    node_count: usize,
    adjacency: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
    labels: Vec<String>,
}

impl Graph {
    /// Assemble a graph from an undirected edge list.
    ///
    /// Rejects self-loops, repeated edges, out-of-range endpoints, label
    /// count mismatches, disconnected edge sets and sizes that disagree with
    /// the family.
    pub fn from_edges(
        family: GraphFamily,
        node_count: usize,
        edges: &[(usize, usize)],
        labels: Vec<String>,
    ) -> Result<Graph> {
        let expected = family.expected_size()?;
        if node_count != expected {
            return Err(Error::DimensionMismatch(format!(
                "{family} has {expected} nodes, got {node_count}"
            )));
        }
        if labels.len() != node_count {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {node_count} nodes",
                labels.len()
            )));
        }
        let mut adjacency = vec![false; node_count * node_count];
        let mut neighbors = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({a}, {b}) references a node outside 0..{node_count}"
                )));
            }
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop at node {a}")));
            }
            if adjacency[a * node_count + b] {
                return Err(Error::InvalidParameter(format!("repeated edge ({a}, {b})")));
            }
            adjacency[a * node_count + b] = true;
            adjacency[b * node_count + a] = true;
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let graph = Graph { family, node_count, adjacency, neighbors, labels };
        graph.check_connected()?;
        Ok(graph)
    }

    fn check_connected(&self) -> Result<()> {
        if self.node_count == 0 {
            return Ok(());
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.neighbors[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        match seen.iter().position(|&s| !s) {
            Some(unreached) => Err(Error::Disconnected { source_node: 0, unreached }),
            None => Ok(()),
        }
    }

    pub fn family(&self) -> GraphFamily {
        self.family
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: usize) -> &str {
        &self.labels[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a * self.node_count + b]
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    /// Edges as `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.node_count)
            .flat_map(|i| self.neighbors[i].iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Degree → number of nodes with that degree.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for node in 0..self.node_count {
            *hist.entry(self.degree(node)).or_insert(0) += 1;
        }
        hist
    }

    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.node_count;
        DMatrix::from_fn(n, n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 })
    }

    /// `L = Z - A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        laplacian(self)
    }
}

/// Graph Laplacian `L = Z - A`, with `Z` the diagonal degree matrix.
pub fn laplacian(graph: &Graph) -> DMatrix<f64> {
    let n = graph.node_count();
    let mut lap = DMatrix::zeros(n, n);
    for i in 0..n {
        lap[(i, i)] = graph.degree(i) as f64;
        for &j in graph.neighbors(i) {
            lap[(i, j)] = -1.0;
        }
    }
    lap
}
