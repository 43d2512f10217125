//! Forward model: SIMP conductivity, P1 stiffness assembly and state solve.
//!
//! The state equation is the weak form of the diffusion equation with a
//! constant volumetric source, homogeneous Dirichlet data on the west-north
//! boundary and natural Neumann data elsewhere. We assemble the symmetric
//! positive definite system `K u = f` over the free (non-Dirichlet) nodes.

use crate::error::{Error, Result};
use crate::field::DesignField;
use crate::linalg::SymBandMatrix;
use crate::mesh::Mesh;

/// Tolerance for accepting design values just outside `[0, 1]`.
const BOX_TOL: f64 = 1e-12;

/// SIMP interpolation parameters: `k(v) = delta + (1 - delta) v^p`.
#[derive(Debug, Clone, Copy)]
pub struct SimpParams {
    /// Conductivity of the void phase, `0 < delta < 1`.
    pub delta: f64,
    /// Penalization exponent, `p >= 1`.
    pub p: f64,
}

impl SimpParams {
    pub fn new(delta: f64, p: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "simp_delta",
                reason: format!("must lie in (0, 1), got {delta}"),
            });
        }
        if !(p >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "simp_p",
                reason: format!("must be at least 1, got {p}"),
            });
        }
        Ok(SimpParams { delta, p })
    }

    /// `k(v) = delta + (1 - delta) v^p`, assuming `v` already validated.
    pub fn conductivity(&self, v: f64) -> f64 {
        self.delta + (1.0 - self.delta) * v.max(0.0).powf(self.p)
    }

    /// `k'(v) = p (1 - delta) v^(p-1)`; the one-sided value at the box
    /// boundary (zero at `v = 0` whenever `p > 1`).
    pub fn conductivity_gradient(&self, v: f64) -> f64 {
        self.p * (1.0 - self.delta) * v.max(0.0).powf(self.p - 1.0)
    }
}

/// SIMP conductivity of a single design value, rejecting values outside
/// `[0, 1]` beyond a 1e-12 tolerance.
pub fn simp_conductivity(v: f64, simp: &SimpParams) -> Result<f64> {
    if !(-BOX_TOL..=1.0 + BOX_TOL).contains(&v) {
        return Err(Error::DesignOutOfRange {
            element: 0,
            value: v,
        });
    }
    Ok(simp.conductivity(v.clamp(0.0, 1.0)))
}

/// Element stiffness `k * area * (B^T B)` for a P1 triangle, where `B` holds
/// the constant gradients of the three hat functions.
pub fn local_stiffness(coords: [[f64; 2]; 3], conductivity: f64) -> Result<[[f64; 3]; 3]> {
    let [a, b, c] = coords;
    let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    if area2.abs() < 1e-300 {
        return Err(Error::DegenerateTriangle { area: 0.5 * area2 });
    }
    let area = 0.5 * area2;
    // gradient of hat i: (y_j - y_k, x_k - x_j) / (2 area), indices cyclic
    let mut gx = [0.0; 3];
    let mut gy = [0.0; 3];
    for i in 0..3 {
        let j = (i + 1) % 3;
        let k = (i + 2) % 3;
        gx[i] = (coords[j][1] - coords[k][1]) / area2;
        gy[i] = (coords[k][0] - coords[j][0]) / area2;
    }
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for s in 0..3 {
            out[r][s] = conductivity * area * (gx[r] * gx[s] + gy[r] * gy[s]);
        }
    }
    Ok(out)
}

/// Assembled state system over the free nodes.
#[derive(Debug, Clone)]
pub struct StiffnessSystem {
    /// Symmetric banded stiffness matrix in free-node indexing.
    pub matrix: SymBandMatrix,
    /// Lumped load vector in free-node indexing.
    pub load: Vec<f64>,
    /// Node index -> free index (None on the Dirichlet boundary).
    pub free_of_node: Vec<Option<usize>>,
    /// Free index -> node index.
    pub node_of_free: Vec<usize>,
}

impl StiffnessSystem {
    pub fn dim(&self) -> usize {
        self.node_of_free.len()
    }
}

/// Nodal temperatures over all mesh nodes; exactly zero on the Dirichlet
/// boundary.
#[derive(Debug, Clone)]
pub struct StateField {
    pub u: Vec<f64>,
}

/// Assembles the system for explicit per-element conductivities.
pub fn assemble_with_conductivity(
    mesh: &Mesh,
    conductivity: &[f64],
    source: f64,
) -> Result<StiffnessSystem> {
    if conductivity.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_elements(),
            got: conductivity.len(),
        });
    }

    let mut free_of_node = vec![None; mesh.num_nodes()];
    let mut node_of_free = Vec::new();
    for (i, slot) in free_of_node.iter_mut().enumerate() {
        if !mesh.dirichlet[i] {
            *slot = Some(node_of_free.len());
            node_of_free.push(i);
        }
    }

    // bandwidth of the free system
    let mut bandwidth = 0usize;
    for tri in &mesh.elements {
        for r in 0..3 {
            for s in 0..3 {
                if let (Some(fi), Some(fj)) = (free_of_node[tri[r]], free_of_node[tri[s]]) {
                    bandwidth = bandwidth.max(fi.abs_diff(fj));
                }
            }
        }
    }

    let mut matrix = SymBandMatrix::new(node_of_free.len(), bandwidth);
    let mut load = vec![0.0; node_of_free.len()];
    for (e, tri) in mesh.elements.iter().enumerate() {
        let coords = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let local = local_stiffness(coords, conductivity[e]).map_err(|err| match err {
            Error::DegenerateTriangle { area } => Error::DegenerateElement { element: e, area },
            other => other,
        })?;
        for r in 0..3 {
            let Some(fi) = free_of_node[tri[r]] else {
                continue;
            };
            load[fi] += source * mesh.element_area[e] / 3.0;
            for s in 0..3 {
                let Some(fj) = free_of_node[tri[s]] else {
                    continue;
                };
                if fi >= fj {
                    matrix.add(fi, fj, local[r][s]);
                }
            }
        }
    }

    Ok(StiffnessSystem {
        matrix,
        load,
        free_of_node,
        node_of_free,
    })
}

/// Assembles the SIMP system for a continuous design.
pub fn assemble(
    mesh: &Mesh,
    v: &DesignField,
    simp: &SimpParams,
    source: f64,
) -> Result<StiffnessSystem> {
    if v.len() != mesh.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: mesh.num_elements(),
            got: v.len(),
        });
    }
    v.check_box(BOX_TOL)?;
    let conductivity: Vec<f64> = v
        .iter()
        .map(|&ve| simp.conductivity(ve.clamp(0.0, 1.0)))
        .collect();
    assemble_with_conductivity(mesh, &conductivity, source)
}

/// Solves `K u = f` and expands the solution to all nodes.
///
/// The relative residual must meet `tol_lin`; Cholesky breakdown and residual
/// failure are reported as distinct errors.
pub fn solve_state(system: &StiffnessSystem, tol_lin: f64) -> Result<StateField> {
    let x = system.matrix.cholesky()?.solve(&system.load);

    let r: f64 = {
        let kx = system.matrix.matvec(&x);
        kx.iter()
            .zip(&system.load)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let f_norm: f64 = system.load.iter().map(|f| f * f).sum::<f64>().sqrt();
    let rel = if f_norm > 0.0 { r / f_norm } else { r };
    if rel > tol_lin {
        return Err(Error::LinearSolveResidual {
            relative: rel,
            tol: tol_lin,
        });
    }

    let mut u = vec![0.0; system.free_of_node.len()];
    for (fi, &node) in system.node_of_free.iter().enumerate() {
        u[node] = x[fi];
    }
    Ok(StateField { u })
}

/// Compliance `f^T u` over the free nodes.
pub fn compliance(state: &StateField, system: &StiffnessSystem) -> f64 {
    system
        .node_of_free
        .iter()
        .enumerate()
        .map(|(fi, &node)| system.load[fi] * state.u[node])
        .sum()
}

/// Bundles the mesh with the physics parameters used by every solve.
#[derive(Debug, Clone, Copy)]
pub struct FemContext<'m> {
    pub mesh: &'m Mesh,
    pub simp: SimpParams,
    pub source: f64,
    pub tol_lin: f64,
}

impl<'m> FemContext<'m> {
    pub fn assemble(&self, v: &DesignField) -> Result<StiffnessSystem> {
        assemble(self.mesh, v, &self.simp, self.source)
    }

    /// Assemble and solve in one step.
    pub fn solve(&self, v: &DesignField) -> Result<(StateField, StiffnessSystem)> {
        let system = self.assemble(v)?;
        let state = solve_state(&system, self.tol_lin)?;
        Ok((state, system))
    }

    /// Compliance of a design, via a fresh state solve.
    pub fn compliance_at(&self, v: &DesignField) -> Result<f64> {
        let (state, system) = self.solve(v)?;
        Ok(compliance(&state, &system))
    }
}
