//! Outer loop: alternate the continuous and discrete subproblems under the
//! funnel acceptance test, with multiplier updates on accepted steps and
//! penalty escalation on rejected ones.

use std::time::Instant;

use crate::adjoint::ContObjectiveParams;
use crate::config::SolverConfig;
use crate::cont_solver::{solve_continuous, BoxBudgetSet};
use crate::disc_solver::{solve_discrete_with_restarts, DiscreteEnergy};
use crate::error::{Error, Result};
use crate::fem::FemContext;
use crate::field::{dist_sq, DesignField};
use crate::mesh::{AdjacencyGraph, Mesh};

/// Funnel and penalty-schedule parameters.
#[derive(Debug, Clone, Copy)]
pub struct FunnelParams {
    /// Acceptance fraction: a step is accepted when the squared residual is
    /// at most `beta * tau`.
    pub beta: f64,
    /// Contraction mix of the funnel radius on accepted steps.
    pub zeta: f64,
    /// Initial slack factor of the funnel radius.
    pub gamma: f64,
    /// Penalty growth factor on rejected steps.
    pub c: f64,
    /// Outer stopping tolerance on the squared copy residual.
    pub delta_tol: f64,
}

impl FunnelParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(bool, &'static str, &str); 5] = [
            (
                self.beta > 0.0 && self.beta < 1.0,
                "beta",
                "must lie in (0, 1)",
            ),
            (
                self.zeta > 0.0 && self.zeta < 1.0,
                "zeta",
                "must lie in (0, 1)",
            ),
            (self.gamma > 1.0, "gamma", "must be greater than 1"),
            (self.c > 1.0, "c", "must be greater than 1"),
            (self.delta_tol > 0.0, "delta_tol", "must be positive"),
        ];
        for (ok, name, reason) in checks {
            if !ok {
                return Err(Error::InvalidParameter {
                    name,
                    reason: reason.into(),
                });
            }
        }
        Ok(())
    }
}

/// `tau_0 = max(1, ||w0 - v0||^2) * gamma`.
pub fn initial_funnel_radius(residual_sq: f64, gamma: f64) -> f64 {
    residual_sq.max(1.0) * gamma
}

/// Acceptance test of a candidate squared residual against the funnel.
pub fn funnel_accepts(residual_sq: f64, tau: f64, beta: f64) -> bool {
    residual_sq <= beta * tau
}

/// Funnel radius after an accepted step.
pub fn funnel_contract(tau: f64, residual_sq: f64, zeta: f64) -> f64 {
    (1.0 - zeta) * tau + zeta * residual_sq
}

/// Current iterates of the outer loop.
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub v: DesignField,
    pub w: DesignField,
    pub lambda: Vec<f64>,
    pub rho: f64,
    pub tau: f64,
    pub iteration: usize,
}

impl AdmmState {
    /// Squared copy residual `||w - v||^2` of the current iterates.
    pub fn residual_sq(&self) -> f64 {
        dist_sq(&self.w, &self.v)
    }
}

/// Scalar log of one outer iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    /// Outer iteration number (1-based, after the update).
    pub j: usize,
    pub accepted: bool,
    /// Squared residual `||w* - v*||^2` of the candidate pair.
    pub residual: f64,
    /// Funnel radius after the update.
    pub tau: f64,
    /// Penalty after the update.
    pub rho: f64,
    /// Compliance at the current binary design (fresh solve).
    pub compliance: f64,
    /// Canonical TV of the current binary design, each pair once.
    pub tv_value: f64,
    /// Objective of the original problem at the current binary design; the
    /// TV term uses the double-sum convention (twice the canonical value).
    pub original_objective: f64,
    /// Augmented Lagrangian at the stored `(v, w, lambda, rho)`, same TV
    /// convention as `original_objective`.
    pub aug_lagrangian: f64,
    /// Seconds spent in this iteration.
    pub wall_time: f64,
}

/// Result of a full solve.
#[derive(Debug, Clone)]
pub struct AdmmRun {
    pub state: AdmmState,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
}

/// Driver owning the pieces every iteration needs.
pub struct Admm<'a> {
    ctx: FemContext<'a>,
    graph: &'a AdjacencyGraph,
    config: &'a SolverConfig,
    funnel: FunnelParams,
    set: BoxBudgetSet,
}

impl<'a> Admm<'a> {
    pub fn new(
        mesh: &'a Mesh,
        graph: &'a AdjacencyGraph,
        config: &'a SolverConfig,
        funnel: FunnelParams,
    ) -> Result<Self> {
        config.validate()?;
        funnel.validate()?;
        if graph.num_elements() != mesh.num_elements() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_elements(),
                got: graph.num_elements(),
            });
        }
        let ctx = FemContext {
            mesh,
            simp: config.simp()?,
            source: config.source,
            tol_lin: config.tol_lin,
        };
        let set = BoxBudgetSet::new(
            config.v_max * mesh.num_elements() as f64,
            mesh.num_elements(),
        )?;
        Ok(Admm {
            ctx,
            graph,
            config,
            funnel,
            set,
        })
    }

    pub fn budget(&self) -> f64 {
        self.set.budget()
    }

    /// Starting iterates: `v0` uniform at the volume fraction, `w0` its
    /// rounding repaired to the budget, `lambda0 = 0`, `rho0` from the
    /// configuration and the funnel radius from the initial residual.
    pub fn initialize(&self) -> Result<AdmmState> {
        let n = self.ctx.mesh.num_elements();
        let v = DesignField::uniform(n, self.config.v_max);

        let mut mask = vec![false; n];
        for (e, &ve) in v.iter().enumerate() {
            mask[e] = ve >= 0.5;
        }
        let cap = (self.set.budget() + 1e-9).floor() as usize;
        if mask.iter().filter(|&&b| b).count() > cap {
            // keep the largest entries, lexicographic among ties
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
            mask.fill(false);
            for &e in order.iter().take(cap) {
                mask[e] = true;
            }
        }
        let w = DesignField::from_bools(&mask);

        let residual = dist_sq(&w, &v);
        Ok(AdmmState {
            v,
            w,
            lambda: vec![0.0; n],
            rho: self.config.rho0,
            tau: initial_funnel_radius(residual, self.funnel.gamma),
            iteration: 0,
        })
    }

    /// One outer iteration: solve both subproblems, test the candidate
    /// residual against the funnel, then either accept (contract the funnel,
    /// move the iterates, update the multiplier) or reject (escalate the
    /// penalty, keep everything else).
    pub fn iterate(&self, state: &mut AdmmState) -> Result<IterationRecord> {
        let started = Instant::now();
        let j = state.iteration;
        let wrap = |source: Error| Error::Subproblem {
            iteration: j,
            source: Box::new(source),
        };

        let cont_params = ContObjectiveParams {
            w_bar: state.w.clone(),
            lambda: state.lambda.clone(),
            rho: state.rho,
        };
        let cont = solve_continuous(
            &self.ctx,
            &state.v,
            &cont_params,
            &self.set,
            &self.config.inner_settings(),
        )
        .map_err(wrap)?;
        let v_star = cont.v_star;

        let energy = DiscreteEnergy::new(
            &v_star,
            &state.lambda,
            state.rho,
            self.config.alpha,
            self.graph,
        )
        .map_err(wrap)?;
        let seed = self
            .config
            .seed
            .wrapping_add((j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let disc = solve_discrete_with_restarts(
            &energy,
            self.set.budget(),
            &state.w,
            seed,
            &self.config.heuristic(),
            self.config.restarts,
        )
        .map_err(wrap)?;
        let w_star = disc.w_star;

        let residual = dist_sq(&w_star, &v_star);
        let accepted = funnel_accepts(residual, state.tau, self.funnel.beta);
        if accepted {
            state.tau = funnel_contract(state.tau, residual, self.funnel.zeta);
            state.v = v_star;
            state.w = w_star;
            for e in 0..state.lambda.len() {
                state.lambda[e] += state.rho * (state.w[e] - state.v[e]);
            }
        } else {
            state.rho *= self.funnel.c;
        }
        state.iteration = j + 1;

        // bookkeeping at the post-update iterates, each with a fresh solve
        let compliance_w = self.ctx.compliance_at(&state.w).map_err(wrap)?;
        let tv_value = self.graph.total_variation(&state.w);
        let original_objective = compliance_w + self.config.alpha * 2.0 * tv_value;

        let compliance_v = self.ctx.compliance_at(&state.v).map_err(wrap)?;
        let lambda_term: f64 = state
            .lambda
            .iter()
            .zip(state.w.iter().zip(state.v.iter()))
            .map(|(&l, (&we, &ve))| l * (we - ve))
            .sum();
        let aug_lagrangian = compliance_v
            + self.config.alpha * 2.0 * tv_value
            + lambda_term
            + 0.5 * state.rho * state.residual_sq();

        Ok(IterationRecord {
            j: state.iteration,
            accepted,
            residual,
            tau: state.tau,
            rho: state.rho,
            compliance: compliance_w,
            tv_value,
            original_objective,
            aug_lagrangian,
            wall_time: started.elapsed().as_secs_f64(),
        })
    }

    /// Runs until the squared copy residual of the iterates meets
    /// `delta_tol` or the iteration cap is hit (flagged, not an error).
    pub fn run(&self) -> Result<AdmmRun> {
        self.run_with_observer(|_, _| {})
    }

    /// Like [`Admm::run`], invoking `observer` with the post-update state
    /// after every iteration.
    pub fn run_with_observer(
        &self,
        mut observer: impl FnMut(&AdmmState, &IterationRecord),
    ) -> Result<AdmmRun> {
        let mut state = self.initialize()?;
        let mut history = Vec::new();
        let mut converged = state.residual_sq() <= self.funnel.delta_tol;
        while !converged && state.iteration < self.config.max_outer {
            let record = self.iterate(&mut state)?;
            observer(&state, &record);
            history.push(record);
            converged = state.residual_sq() <= self.funnel.delta_tol;
        }
        Ok(AdmmRun {
            state,
            history,
            converged,
        })
    }
}
