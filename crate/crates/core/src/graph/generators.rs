use std::collections::HashMap;

use super::{Graph, GraphFamily};
use crate::Result;

/// Sub-gasket position inside its parent triangle, in enumeration order.
const CORNERS: [char; 3] = ['T', 'L', 'R'];

/// Generation-`g` Sierpinski gasket as a combinatorial object.
///
/// Vertices carry integer affine coordinates `(a, b)` with the apex at the
/// origin, the left corner at `(2^g, 0)` and the right corner at `(0, 2^g)`.
/// The `3^g` smallest upward triangles are enumerated depth-first (top
/// sub-gasket first, then left, then right), which is also the node order of
/// the dual gasket.
#[derive(Clone, Debug)]
pub struct SierpinskiGasket {
    pub generation: u32,
    pub vertices: Vec<(u64, u64)>,
    /// Vertex indices of each smallest triangle as `[top, left, right]`.
    pub triangles: Vec<[usize; 3]>,
    /// Address of each triangle, one `T`/`L`/`R` letter per level.
    pub addresses: Vec<String>,
}

impl SierpinskiGasket {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Sides of the smallest triangles, `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (a, c), (b, c)])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

pub fn build_sierpinski_gasket(g: u32) -> Result<SierpinskiGasket> {
    GraphFamily::DualSierpinski { g }.validate()?;
    let mut gasket = SierpinskiGasket {
        generation: g,
        vertices: Vec::new(),
        triangles: Vec::with_capacity(3usize.pow(g)),
        addresses: Vec::with_capacity(3usize.pow(g)),
    };
    let mut index: HashMap<(u64, u64), usize> = HashMap::new();
    let mut address = String::with_capacity(g as usize);
    subdivide(&mut gasket, &mut index, &mut address, (0, 0), 1u64 << g);
    Ok(gasket)
}

fn subdivide(
    gasket: &mut SierpinskiGasket,
    index: &mut HashMap<(u64, u64), usize>,
    address: &mut String,
    origin: (u64, u64),
    size: u64,
) {
    if size == 1 {
        let corners = [origin, (origin.0 + 1, origin.1), (origin.0, origin.1 + 1)];
        let ids = corners.map(|p| {
            *index.entry(p).or_insert_with(|| {
                gasket.vertices.push(p);
                gasket.vertices.len() - 1
            })
        });
        gasket.triangles.push(ids);
        gasket.addresses.push(address.clone());
        return;
    }
    let half = size / 2;
    let origins = [origin, (origin.0 + half, origin.1), (origin.0, origin.1 + half)];
    for (corner, sub) in CORNERS.iter().zip(origins) {
        address.push(*corner);
        subdivide(gasket, index, address, sub, half);
        address.pop();
    }
}

/// Dual Sierpinski Gasket: one node per smallest SG triangle, an edge
/// whenever two triangles share an SG vertex.
///
/// Node `i` corresponds to triangle `i` of [`build_sierpinski_gasket`], so
/// the apex is node 0 and the left corners of the nested sub-gaskets are
/// nodes 1, 4, 13, 40, ... (one-based: 2, 5, 14, 41). The three main
/// vertices are `0`, `(3^g - 1) / 2` and `3^g - 1`.
pub fn build_dual_sierpinski(g: u32) -> Result<Graph> {
    let gasket = build_sierpinski_gasket(g)?;
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); gasket.vertex_count()];
    for (t, tri) in gasket.triangles.iter().enumerate() {
        for &v in tri {
            owners[v].push(t);
        }
    }
    let mut edges = Vec::new();
    for list in owners {
        match list.as_slice() {
            [_] => {}
            [a, b] => edges.push((*a.min(b), *a.max(b))),
            other => unreachable!("SG vertex shared by {} triangles", other.len()),
        }
    }
    edges.sort_unstable();
    let labels = gasket.addresses;
    Graph::from_edges(GraphFamily::DualSierpinski { g }, 3usize.pow(g), &edges, labels)
}

/// Cayley tree grown shell by shell from a root of degree `z`.
///
/// Nodes are numbered breadth-first: root 0, then shell 1, shell 2, ...
/// Labels give the shell and the child-index path from the root.
pub fn build_cayley_tree(z: usize, shells: u32) -> Result<Graph> {
    let family = GraphFamily::CayleyTree { z, shells };
    let n = family.expected_size()?;
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut labels = Vec::with_capacity(n);
    labels.push("root".to_string());
    let mut paths: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for shell in 1..=shells {
        let branching = if shell == 1 { z } else { z - 1 };
        let mut next = Vec::with_capacity(frontier.len() * branching);
        for &parent in &frontier {
            for child in 0..branching {
                let id = paths.len();
                let mut path = paths[parent].clone();
                path.push(child);
                let joined: Vec<String> = path.iter().map(usize::to_string).collect();
                labels.push(format!("s{shell}:{}", joined.join(".")));
                paths.push(path);
                edges.push((parent, id));
                next.push(id);
            }
        }
        frontier = next;
    }
    Graph::from_edges(family, n, &edges, labels)
}

/// Coordinates of node `index` on a side-`side` lattice, first axis fastest.
pub(crate) fn lattice_coords(index: usize, d: u32, side: usize) -> Vec<usize> {
    let mut rest = index;
    (0..d)
        .map(|_| {
            let c = rest % side;
            rest /= side;
            c
        })
        .collect()
}

fn coords_label(coords: &[usize]) -> String {
    let parts: Vec<String> = coords.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

/// Hypercubic lattice with periodic boundaries; node index
/// `c_0 + c_1 L + c_2 L^2 + ...`.
pub fn build_hypercubic_torus(d: u32, side: usize) -> Result<Graph> {
    let family = GraphFamily::HypercubicTorus { d, side };
    let n = family.expected_size()?;
    let mut edges = Vec::with_capacity(n * d as usize);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let coords = lattice_coords(i, d, side);
        labels.push(coords_label(&coords));
        let mut stride = 1;
        for &c in &coords {
            let up = i - c * stride + ((c + 1) % side) * stride;
            edges.push((i.min(up), i.max(up)));
            stride *= side;
        }
    }
    edges.sort_unstable();
    Graph::from_edges(family, n, &edges, labels)
}

pub fn build_ring(n: usize) -> Result<Graph> {
    let family = GraphFamily::Ring { n };
    family.validate()?;
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    edges.push((0, n - 1));
    Graph::from_edges(family, n, &edges, (0..n).map(|i| i.to_string()).collect())
}

pub fn build_chain(n: usize) -> Result<Graph> {
    let family = GraphFamily::Chain { n };
    family.validate()?;
    let edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    Graph::from_edges(family, n, &edges, (0..n).map(|i| i.to_string()).collect())
}

pub fn build_complete(n: usize) -> Result<Graph> {
    let family = GraphFamily::Complete { n };
    family.validate()?;
    let edges: Vec<(usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    Graph::from_edges(family, n, &edges, (0..n).map(|i| i.to_string()).collect())
}
