//! Uniform triangular mesh of the unit square and its element adjacency.
//!
//! The square is divided into `n x n` cells, each split into two triangles by
//! the lower-left to upper-right diagonal. Nodes are ordered row-major by
//! `(y, x)`. The Dirichlet boundary is the west edge (`x = 0`) together with
//! the north edge (`y = 1`); the remaining boundary is homogeneous Neumann.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Triangulation of the unit square.
#[derive(Debug, Clone)]
pub struct Mesh {
    /// Node coordinates in `[0, 1]^2`.
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise node triples.
    pub elements: Vec<[usize; 3]>,
    /// Marks nodes on the Dirichlet (west-north) boundary.
    pub dirichlet: Vec<bool>,
    /// Per-element area, `h^2 / 2` on the uniform mesh.
    pub element_area: Vec<f64>,
    /// Number of cell subdivisions per side.
    pub subdivisions: usize,
}

impl Mesh {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// Cell edge length `1 / n`.
    pub fn cell_size(&self) -> f64 {
        1.0 / self.subdivisions as f64
    }

    /// Sorted indices of Dirichlet boundary nodes.
    pub fn dirichlet_node_indices(&self) -> Vec<usize> {
        self.dirichlet
            .iter()
            .enumerate()
            .filter_map(|(i, &d)| d.then_some(i))
            .collect()
    }

    /// Plain-text node/element listing, one record per line.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.nodes.iter().enumerate() {
            let tag = if self.dirichlet[i] { "D" } else { "N" };
            let _ = writeln!(out, "node {} {:.17} {:.17} {}", i, p[0], p[1], tag);
        }
        for (e, tri) in self.elements.iter().enumerate() {
            let _ = writeln!(out, "element {} {} {} {}", e, tri[0], tri[1], tri[2]);
        }
        out
    }
}

/// Signed area of the triangle `(a, b, c)`.
fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

/// Builds the uniform triangular mesh with `n x n` cells (`2 n^2` elements).
pub fn build_unit_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "subdivision count must be at least 1".into(),
        });
    }
    let h = 1.0 / n as f64;
    let stride = n + 1;

    let mut nodes = Vec::with_capacity(stride * stride);
    let mut dirichlet = vec![false; stride * stride];
    for iy in 0..stride {
        for ix in 0..stride {
            nodes.push([ix as f64 * h, iy as f64 * h]);
            if ix == 0 || iy == n {
                dirichlet[iy * stride + ix] = true;
            }
        }
    }

    let mut elements = Vec::with_capacity(2 * n * n);
    for iy in 0..n {
        for ix in 0..n {
            let ll = iy * stride + ix;
            let lr = ll + 1;
            let ul = ll + stride;
            let ur = ul + 1;
            // split along the ll-ur diagonal
            elements.push([ll, lr, ur]);
            elements.push([ll, ur, ul]);
        }
    }

    let mut element_area = Vec::with_capacity(elements.len());
    for (e, tri) in elements.iter().enumerate() {
        let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
        if area <= 0.0 {
            return Err(Error::DegenerateElement { element: e, area });
        }
        element_area.push(area);
    }

    Ok(Mesh {
        nodes,
        elements,
        dirichlet,
        element_area,
        subdivisions: n,
    })
}

/// Element adjacency with total-variation edge weights.
///
/// Two elements are adjacent iff they share a full edge. The weight is the
/// shared edge length divided by the cell size: 1 for axis-aligned edges,
/// sqrt(2) for diagonals.
#[derive(Debug, Clone)]
pub struct AdjacencyGraph {
    /// For each element, its `(neighbor, weight)` pairs.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    /// Every unordered adjacent pair `(e, e')` with `e < e'` once.
    pub edges: Vec<(usize, usize, f64)>,
}

impl AdjacencyGraph {
    pub fn num_elements(&self) -> usize {
        self.neighbors.len()
    }

    /// Weighted anisotropic total variation `sum_{(e,e')} s_ee' |x_e - x_e'|`,
    /// each unordered pair counted once.
    pub fn total_variation(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.neighbors.len());
        self.edges
            .iter()
            .map(|&(a, b, s)| s * (values[a] - values[b]).abs())
            .sum()
    }
}

/// Builds the element adjacency of `mesh`.
pub fn build_adjacency(mesh: &Mesh) -> AdjacencyGraph {
    let h = mesh.cell_size();
    // map from sorted node pair to the elements containing that edge
    let mut edge_owners: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (e, tri) in mesh.elements.iter().enumerate() {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            edge_owners.entry(key).or_default().push(e);
        }
    }

    let mut neighbors = vec![Vec::new(); mesh.num_elements()];
    let mut edges = Vec::new();
    for (&(a, b), owners) in &edge_owners {
        if owners.len() == 2 {
            let (pa, pb) = (mesh.nodes[a], mesh.nodes[b]);
            let len = ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt();
            let weight = len / h;
            let (e0, e1) = (owners[0].min(owners[1]), owners[0].max(owners[1]));
            neighbors[e0].push((e1, weight));
            neighbors[e1].push((e0, weight));
            edges.push((e0, e1, weight));
        }
    }
    for list in &mut neighbors {
        list.sort_by_key(|&(e, _)| e);
    }
    edges.sort_by_key(|&(a, b, _)| (a, b));

    AdjacencyGraph { neighbors, edges }
}
