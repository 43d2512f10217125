//! Continuous subproblem solver: projected gradient descent over the box
//! plus volume-budget set, with Armijo backtracking.
//!
//! The feasible set `{v in [0,1]^n : sum v <= B}` admits a cheap exact
//! Euclidean projection, so a projected first-order method needs no external
//! optimizer.

use crate::adjoint::{cont_objective_and_gradient, ContObjectiveParams};
use crate::error::{Error, Result};
use crate::fem::FemContext;
use crate::field::DesignField;

/// Box-and-budget feasible set `{v in [0,1]^dim : sum v <= budget}`.
#[derive(Debug, Clone, Copy)]
pub struct BoxBudgetSet {
    budget: f64,
    dim: usize,
}

impl BoxBudgetSet {
    pub fn new(budget: f64, dim: usize) -> Result<Self> {
        if !(budget > 0.0 && budget <= dim as f64) {
            return Err(Error::InvalidParameter {
                name: "budget",
                reason: format!("must lie in (0, {dim}], got {budget}"),
            });
        }
        Ok(BoxBudgetSet { budget, dim })
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        v.len() == self.dim
            && v.iter().all(|&x| x >= -tol && x <= 1.0 + tol)
            && v.iter().sum::<f64>() <= self.budget + tol
    }
}

/// Euclidean projection onto the box-and-budget set.
///
/// Clips to the box first; if the budget still holds that is the projection.
/// Otherwise the budget is active and the projection is
/// `clip(x - mu, 0, 1)` for the unique shift `mu > 0` with
/// `sum clip(x - mu, 0, 1) = budget`, located by bisection.
pub fn project_box_budget(x: &[f64], set: &BoxBudgetSet) -> Vec<f64> {
    debug_assert_eq!(x.len(), set.dim);
    let clipped: Vec<f64> = x.iter().map(|&t| t.clamp(0.0, 1.0)).collect();
    let sum: f64 = clipped.iter().sum();
    if sum <= set.budget {
        return clipped;
    }

    let shifted_sum = |mu: f64| -> f64 { x.iter().map(|&t| (t - mu).clamp(0.0, 1.0)).sum() };
    let mut lo = 0.0;
    let mut hi = x.iter().cloned().fold(0.0, f64::max); // sum at hi is 0 <= budget
    let mut mu = hi;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let s = shifted_sum(mid);
        // settle on the feasible side so re-projection is the identity
        if s <= set.budget && set.budget - s <= 1e-12 {
            mu = mid;
            break;
        }
        if s > set.budget {
            lo = mid;
        } else {
            hi = mid;
        }
        mu = hi;
    }
    x.iter().map(|&t| (t - mu).clamp(0.0, 1.0)).collect()
}

/// Knobs of the projected gradient loop.
#[derive(Debug, Clone, Copy)]
pub struct InnerSolveSettings {
    /// Stop when the step infinity-norm drops below this.
    pub tol_inner: f64,
    pub max_inner: usize,
    /// Initial line-search step, halved on rejection.
    pub t_init: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    pub max_halvings: usize,
}

impl Default for InnerSolveSettings {
    fn default() -> Self {
        InnerSolveSettings {
            tol_inner: 1e-6,
            max_inner: 500,
            t_init: 1.0,
            armijo: 1e-4,
            max_halvings: 40,
        }
    }
}

/// Outcome of one continuous solve.
#[derive(Debug, Clone)]
pub struct ContSolveReport {
    pub v_star: DesignField,
    pub objective: f64,
    pub iterations: usize,
    pub last_step_norm: f64,
    pub projected_gradient_norm: f64,
    /// Set when backtracking found no acceptable step; the best iterate so
    /// far is returned.
    pub line_search_failed: bool,
}

/// Minimizes the continuous subproblem objective over the feasible set by
/// projected gradient descent with Armijo backtracking.
pub fn solve_continuous(
    ctx: &FemContext,
    v_init: &DesignField,
    params: &ContObjectiveParams,
    set: &BoxBudgetSet,
    settings: &InnerSolveSettings,
) -> Result<ContSolveReport> {
    if v_init.len() != set.dim() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            got: v_init.len(),
        });
    }
    if !set.contains(v_init, 1e-9) {
        return Err(Error::InfeasibleStart(format!(
            "sum {} exceeds budget {} or box violated",
            v_init.sum(),
            set.budget()
        )));
    }

    // canonicalize round-off level violations
    let mut v = project_box_budget(v_init, set);
    let (mut f_cur, mut g_cur) =
        cont_objective_and_gradient(ctx, &DesignField::from_vec(v.clone()), params)?;

    let mut iterations = 0;
    let mut last_step_norm = 0.0;
    let mut line_search_failed = false;

    for _ in 0..settings.max_inner {
        let mut t = settings.t_init;
        let mut accepted = None;
        for _ in 0..settings.max_halvings {
            let trial: Vec<f64> = v.iter().zip(&g_cur).map(|(&x, &g)| x - t * g).collect();
            let cand = project_box_budget(&trial, set);
            let dir_dot: f64 = g_cur
                .iter()
                .zip(cand.iter().zip(&v))
                .map(|(&g, (&c, &x))| g * (c - x))
                .sum();
            let (f_new, g_new) =
                cont_objective_and_gradient(ctx, &DesignField::from_vec(cand.clone()), params)?;
            if f_new <= f_cur + settings.armijo * dir_dot {
                accepted = Some((cand, f_new, g_new));
                break;
            }
            t *= 0.5;
        }

        let Some((cand, f_new, g_new)) = accepted else {
            line_search_failed = true;
            break;
        };
        last_step_norm = cand
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = cand;
        f_cur = f_new;
        g_cur = g_new;
        iterations += 1;
        if last_step_norm <= settings.tol_inner {
            break;
        }
    }

    let stationarity: Vec<f64> = v.iter().zip(&g_cur).map(|(&x, &g)| x - g).collect();
    let pg = project_box_budget(&stationarity, set);
    let projected_gradient_norm = pg
        .iter()
        .zip(&v)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();

    Ok(ContSolveReport {
        v_star: DesignField::from_vec(v),
        objective: f_cur,
        iterations,
        last_step_norm,
        projected_gradient_norm,
        line_search_failed,
    })
}
