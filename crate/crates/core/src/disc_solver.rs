//! Discrete subproblem solver: weighted TV plus the linearized quadratic
//! penalty over binary labels under a cardinality budget.
//!
//! Two routes are provided. `solve_discrete_exact` enumerates tiny instances
//! and is the validation oracle. `solve_discrete_heuristic` runs randomized
//! connected-region flips followed by a flip/swap local search and scales to
//! production meshes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{dist_sq, DesignField};
use crate::mesh::AdjacencyGraph;

/// Largest instance `solve_discrete_exact` will enumerate.
pub const EXACT_ENUMERATION_LIMIT: usize = 24;

const BINARY_TOL: f64 = 1e-9;

/// Discrete objective in unary/pairwise form.
///
/// Expanding `(rho/2)(w_e - v_e)^2 + lambda_e w_e` for binary `w_e` gives the
/// unary cost `c_e = lambda_e + (rho/2)(1 - 2 v_e)` plus a constant
/// `(rho/2)||v||^2 - lambda^T v`, so reported energies match the full
/// objective, not just the variable part.
#[derive(Debug, Clone)]
pub struct DiscreteEnergy<'g> {
    pub unary: Vec<f64>,
    pub alpha: f64,
    pub constant: f64,
    pub graph: &'g AdjacencyGraph,
}

impl<'g> DiscreteEnergy<'g> {
    pub fn new(
        v_bar: &DesignField,
        lambda: &[f64],
        rho: f64,
        alpha: f64,
        graph: &'g AdjacencyGraph,
    ) -> Result<Self> {
        let n = graph.num_elements();
        if v_bar.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v_bar.len(),
            });
        }
        if lambda.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: lambda.len(),
            });
        }
        if !(rho > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("must be positive, got {rho}"),
            });
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("must be nonnegative, got {alpha}"),
            });
        }
        let unary = lambda
            .iter()
            .zip(v_bar.iter())
            .map(|(&l, &vb)| l + 0.5 * rho * (1.0 - 2.0 * vb))
            .collect();
        let constant = 0.5 * rho * v_bar.iter().map(|x| x * x).sum::<f64>()
            - lambda
                .iter()
                .zip(v_bar.iter())
                .map(|(&l, &vb)| l * vb)
                .sum::<f64>();
        Ok(DiscreteEnergy {
            unary,
            alpha,
            constant,
            graph,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.unary.len()
    }

    /// Full objective value of a labeling.
    pub fn energy(&self, w: &[bool]) -> f64 {
        debug_assert_eq!(w.len(), self.unary.len());
        let unary: f64 = w
            .iter()
            .zip(&self.unary)
            .map(|(&on, &c)| if on { c } else { 0.0 })
            .sum();
        let tv: f64 = self
            .graph
            .edges
            .iter()
            .map(|&(a, b, s)| if w[a] != w[b] { s } else { 0.0 })
            .sum();
        unary + self.alpha * tv + self.constant
    }

    /// Energy change from flipping element `e`.
    pub fn flip_delta(&self, w: &[bool], e: usize) -> f64 {
        let mut delta = if w[e] { -self.unary[e] } else { self.unary[e] };
        for &(nb, s) in &self.graph.neighbors[e] {
            delta += self.alpha * s * if w[nb] == w[e] { 1.0 } else { -1.0 };
        }
        delta
    }

    /// Energy change from setting every element of `region` to `to`.
    /// `in_region[e]` must be true exactly for the region members.
    fn region_flip_delta(&self, w: &[bool], region: &[usize], in_region: &[bool], to: bool) -> f64 {
        let mut delta = 0.0;
        for &e in region {
            if w[e] != to {
                delta += if to { self.unary[e] } else { -self.unary[e] };
            }
            for &(nb, s) in &self.graph.neighbors[e] {
                if in_region[nb] {
                    // interior edge, count once; ends at a common label
                    if e < nb && w[e] != w[nb] {
                        delta -= self.alpha * s;
                    }
                } else {
                    let old = (w[e] != w[nb]) as u8 as f64;
                    let new = (to != w[nb]) as u8 as f64;
                    delta += self.alpha * s * (new - old);
                }
            }
        }
        delta
    }
}

/// Full objective of the discrete subproblem evaluated from scratch:
/// `alpha * TV(w) + lambda^T (w - v_bar) + (rho/2) ||w - v_bar||^2`,
/// each unordered adjacent pair counted once.
pub fn discrete_objective(
    w: &DesignField,
    v_bar: &DesignField,
    lambda: &[f64],
    rho: f64,
    alpha: f64,
    graph: &AdjacencyGraph,
) -> Result<f64> {
    if w.len() != v_bar.len() || w.len() != lambda.len() || w.len() != graph.num_elements() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_elements(),
            got: w.len(),
        });
    }
    // reject non-binary labelings
    w.to_bools(BINARY_TOL)?;
    let tv = graph.total_variation(w);
    let lin: f64 = lambda
        .iter()
        .zip(w.iter().zip(v_bar.iter()))
        .map(|(&l, (&we, &vb))| l * (we - vb))
        .sum();
    Ok(alpha * tv + lin + 0.5 * rho * dist_sq(w, v_bar))
}

/// Outcome of a discrete solve.
#[derive(Debug, Clone)]
pub struct DiscSolveReport {
    pub w_star: DesignField,
    pub energy: f64,
    pub moves_tried: usize,
    pub moves_accepted: usize,
    pub seed: u64,
}

fn max_ones(budget: f64, n: usize) -> usize {
    ((budget + 1e-9).floor().max(0.0) as usize).min(n)
}

/// Global minimizer by enumeration; only for instances of at most
/// [`EXACT_ENUMERATION_LIMIT`] elements. Ties break toward the
/// lexicographically smallest labeling.
pub fn solve_discrete_exact(energy: &DiscreteEnergy, budget: f64) -> Result<DiscSolveReport> {
    let n = energy.num_elements();
    if n > EXACT_ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: n,
            max: EXACT_ENUMERATION_LIMIT,
        });
    }
    let cap = max_ones(budget, n);
    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut tried = 0usize;
    let mut improved = 0usize;
    let mut w = vec![false; n];
    for mask in 0u64..(1u64 << n) {
        if mask.count_ones() as usize > cap {
            continue;
        }
        for (e, we) in w.iter_mut().enumerate() {
            *we = mask >> e & 1 == 1;
        }
        let value = energy.energy(&w);
        tried += 1;
        let take = match &best {
            None => true,
            Some((bv, bw)) => value < *bv || (value == *bv && lex_less(&w, bw)),
        };
        if take {
            improved += 1;
            best = Some((value, w.clone()));
        }
    }
    let (value, w_best) = best.expect("all-zero labeling is always feasible");
    Ok(DiscSolveReport {
        w_star: DesignField::from_bools(&w_best),
        energy: value,
        moves_tried: tried,
        moves_accepted: improved,
        seed: 0,
    })
}

fn lex_less(a: &[bool], b: &[bool]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x != y {
            return !*x;
        }
    }
    false
}

/// Parameters of the randomized connected-region heuristic.
#[derive(Debug, Clone, Copy)]
pub struct HeuristicParams {
    /// Probability of continuing region growth across each explored edge.
    pub continuation: f64,
    /// Maximum region size.
    pub region_cap: usize,
    /// Region proposals per element (total proposals = sweeps * |E|).
    pub sweeps: usize,
}

impl Default for HeuristicParams {
    fn default() -> Self {
        HeuristicParams {
            continuation: 0.7,
            region_cap: 64,
            sweeps: 20,
        }
    }
}

/// Randomized connected-region descent for the discrete subproblem.
///
/// Repeatedly grows a random connected region from a random seed element and
/// proposes relabeling the whole region to 0 or to 1; a proposal is accepted
/// only if the energy strictly decreases and the budget holds. A flip/swap
/// local search then runs to exhaustion, so the output is a 1-flip local
/// minimum. Deterministic for a fixed `seed`.
pub fn solve_discrete_heuristic(
    energy: &DiscreteEnergy,
    budget: f64,
    w_init: &DesignField,
    seed: u64,
    params: &HeuristicParams,
) -> Result<DiscSolveReport> {
    let n = energy.num_elements();
    if w_init.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: w_init.len(),
        });
    }
    let mut w = w_init.to_bools(BINARY_TOL)?;
    let cap = max_ones(budget, n);
    let mut count = w.iter().filter(|&&b| b).count();
    if count > cap {
        return Err(Error::InfeasibleStart(format!(
            "initial labeling has {count} ones, budget allows {cap}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tracked = energy.energy(&w);
    let mut tried = 0usize;
    let mut accepted = 0usize;

    let mut in_region = vec![false; n];
    let mut region: Vec<usize> = Vec::with_capacity(params.region_cap.max(1));

    let proposals = params.sweeps.saturating_mul(n);
    for _ in 0..proposals {
        region.clear();
        let start = rng.random_range(0..n);
        region.push(start);
        in_region[start] = true;
        let mut cursor = 0;
        while cursor < region.len() && region.len() < params.region_cap {
            let e = region[cursor];
            cursor += 1;
            for &(nb, _) in &energy.graph.neighbors[e] {
                if region.len() >= params.region_cap {
                    break;
                }
                if !in_region[nb] && rng.random_bool(params.continuation) {
                    in_region[nb] = true;
                    region.push(nb);
                }
            }
        }

        let to = rng.random_bool(0.5);
        let changed = region.iter().filter(|&&e| w[e] != to).count();
        let new_count = if to { count + changed } else { count - changed };
        let delta = energy.region_flip_delta(&w, &region, &in_region, to);
        tried += 1;
        if delta < 0.0 && new_count <= cap {
            for &e in &region {
                w[e] = to;
            }
            count = new_count;
            tracked += delta;
            accepted += 1;
        }
        for &e in &region {
            in_region[e] = false;
        }
    }

    // polish: single flips, then budget-preserving swaps, until neither helps
    loop {
        let mut improved = false;
        for e in 0..n {
            if !w[e] && count == cap {
                continue;
            }
            tried += 1;
            let delta = energy.flip_delta(&w, e);
            if delta < 0.0 {
                count = if w[e] { count - 1 } else { count + 1 };
                w[e] = !w[e];
                tracked += delta;
                accepted += 1;
                improved = true;
            }
        }
        for e_off in 0..n {
            if !w[e_off] {
                continue;
            }
            tried += 1;
            let d_off = energy.flip_delta(&w, e_off);
            w[e_off] = false;
            let mut taken = false;
            for e_on in 0..n {
                if w[e_on] {
                    continue;
                }
                let d_on = energy.flip_delta(&w, e_on);
                if d_off + d_on < 0.0 {
                    w[e_on] = true;
                    tracked += d_off + d_on;
                    accepted += 1;
                    improved = true;
                    taken = true;
                    break;
                }
            }
            if !taken {
                w[e_off] = true;
            }
        }
        if !improved {
            break;
        }
    }

    let recomputed = energy.energy(&w);
    debug_assert!(
        (recomputed - tracked).abs() <= 1e-9 * recomputed.abs().max(1.0),
        "incremental energy drifted: {tracked} vs {recomputed}"
    );
    Ok(DiscSolveReport {
        w_star: DesignField::from_bools(&w),
        energy: recomputed,
        moves_tried: tried,
        moves_accepted: accepted,
        seed,
    })
}

/// Runs the heuristic from `restarts` derived seeds and keeps the best
/// labeling (first winner on ties).
pub fn solve_discrete_with_restarts(
    energy: &DiscreteEnergy,
    budget: f64,
    w_init: &DesignField,
    base_seed: u64,
    params: &HeuristicParams,
    restarts: usize,
) -> Result<DiscSolveReport> {
    let mut best: Option<DiscSolveReport> = None;
    for i in 0..restarts.max(1) {
        let seed = base_seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let report = solve_discrete_heuristic(energy, budget, w_init, seed, params)?;
        let better = match &best {
            None => true,
            Some(b) => report.energy < b.energy,
        };
        if better {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one restart runs"))
}
