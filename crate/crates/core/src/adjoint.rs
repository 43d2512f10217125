//! Design sensitivities of compliance and the continuous subproblem
//! objective.
//!
//! Compliance is self-adjoint: with `K u = f` the derivative with respect to
//! the element design is `-k'(v_e) u_e^T S_e u_e`, where `S_e` is the
//! unit-conductivity element stiffness. No extra adjoint solve is needed.

use crate::error::{Error, Result};
use crate::fem::{compliance, local_stiffness, FemContext, StateField, StiffnessSystem};
use crate::field::{dist_sq, DesignField};

/// Frozen data of the continuous subproblem: binary reference design,
/// multiplier vector and penalty.
#[derive(Debug, Clone)]
pub struct ContObjectiveParams {
    pub w_bar: DesignField,
    pub lambda: Vec<f64>,
    pub rho: f64,
}

impl ContObjectiveParams {
    pub fn validate(&self, num_elements: usize) -> Result<()> {
        if self.w_bar.len() != num_elements {
            return Err(Error::DimensionMismatch {
                expected: num_elements,
                got: self.w_bar.len(),
            });
        }
        if self.lambda.len() != num_elements {
            return Err(Error::DimensionMismatch {
                expected: num_elements,
                got: self.lambda.len(),
            });
        }
        if !(self.rho > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be positive, got {}", self.rho),
            });
        }
        Ok(())
    }
}

/// Per-element `u_e^T S_e u_e` at unit conductivity (nonnegative).
fn element_energies(ctx: &FemContext, u: &StateField) -> Result<Vec<f64>> {
    let mesh = ctx.mesh;
    let mut energies = Vec::with_capacity(mesh.num_elements());
    for tri in &mesh.elements {
        let coords = [mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]];
        let s = local_stiffness(coords, 1.0)?;
        let ue = [u.u[tri[0]], u.u[tri[1]], u.u[tri[2]]];
        let mut q = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                q += ue[r] * s[r][c] * ue[c];
            }
        }
        energies.push(q);
    }
    Ok(energies)
}

fn gradient_from_state(ctx: &FemContext, v: &DesignField, u: &StateField) -> Result<Vec<f64>> {
    let energies = element_energies(ctx, u)?;
    Ok(v.iter()
        .zip(energies)
        .map(|(&ve, q)| -ctx.simp.conductivity_gradient(ve.clamp(0.0, 1.0)) * q)
        .collect())
}

/// Verifies that `u` actually solves the state equation for `v`.
fn check_state_fresh(ctx: &FemContext, system: &StiffnessSystem, u: &StateField) -> Result<()> {
    let x: Vec<f64> = system.node_of_free.iter().map(|&n| u.u[n]).collect();
    let kx = system.matrix.matvec(&x);
    let r: f64 = kx
        .iter()
        .zip(&system.load)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let f_norm: f64 = system.load.iter().map(|f| f * f).sum::<f64>().sqrt();
    let rel = if f_norm > 0.0 { r / f_norm } else { r };
    // allow slack over the solve tolerance so freshly solved states pass
    let tol = 100.0 * ctx.tol_lin;
    if rel > tol {
        return Err(Error::StaleState { relative: rel, tol });
    }
    Ok(())
}

/// Gradient of compliance with respect to the per-element design.
///
/// `u` must solve the state equation for `v`; a stale state is rejected
/// rather than silently differentiated.
pub fn compliance_gradient(ctx: &FemContext, v: &DesignField, u: &StateField) -> Result<Vec<f64>> {
    if u.u.len() != ctx.mesh.num_nodes() {
        return Err(Error::DimensionMismatch {
            expected: ctx.mesh.num_nodes(),
            got: u.u.len(),
        });
    }
    let system = ctx.assemble(v)?;
    check_state_fresh(ctx, &system, u)?;
    gradient_from_state(ctx, v, u)
}

/// Value and gradient of the continuous subproblem objective
///
/// `compliance(v) + lambda^T (w_bar - v) + (rho / 2) ||w_bar - v||^2`.
///
/// Performs exactly one state solve.
pub fn cont_objective_and_gradient(
    ctx: &FemContext,
    v: &DesignField,
    params: &ContObjectiveParams,
) -> Result<(f64, Vec<f64>)> {
    params.validate(ctx.mesh.num_elements())?;
    let (state, system) = ctx.solve(v)?;
    let comp = compliance(&state, &system);

    let lambda_term: f64 = params
        .lambda
        .iter()
        .zip(params.w_bar.iter().zip(v.iter()))
        .map(|(&l, (&wb, &ve))| l * (wb - ve))
        .sum();
    let penalty = 0.5 * params.rho * dist_sq(&params.w_bar, v);
    let value = comp + lambda_term + penalty;

    let mut grad = gradient_from_state(ctx, v, &state)?;
    for e in 0..grad.len() {
        grad[e] += -params.lambda[e] - params.rho * (params.w_bar[e] - v[e]);
    }
    Ok((value, grad))
}
