//! Solver configuration: every tunable in one place, with validated ranges.

use crate::admm::FunnelParams;
use crate::cont_solver::InnerSolveSettings;
use crate::disc_solver::HeuristicParams;
use crate::error::{Error, Result};
use crate::fem::SimpParams;

/// All solver tunables. `Default` gives the documented defaults; use
/// [`SolverConfig::validate`] after any mutation.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Mesh subdivisions per side (elements = 2 n^2).
    pub n: usize,
    /// Total-variation weight.
    pub alpha: f64,
    /// Initial penalty.
    pub rho0: f64,
    /// Initial funnel slack factor (> 1).
    pub gamma: f64,
    /// Funnel acceptance fraction, in (0, 1).
    pub beta: f64,
    /// Funnel contraction mix, in (0, 1).
    pub zeta: f64,
    /// Penalty growth factor on rejected steps (> 1).
    pub c: f64,
    /// Outer stopping tolerance on the squared copy residual.
    pub delta_tol: f64,
    /// Volume fraction bound, in (0, 1].
    pub v_max: f64,
    /// SIMP void conductivity.
    pub simp_delta: f64,
    /// SIMP penalization exponent.
    pub simp_p: f64,
    /// Constant volumetric source.
    pub source: f64,
    /// Inner (continuous) step tolerance.
    pub tol_inner: f64,
    /// Inner iteration cap.
    pub max_inner: usize,
    /// Linear solve relative-residual tolerance.
    pub tol_lin: f64,
    /// Region growth continuation probability, in (0, 1).
    pub q: f64,
    /// Region size cap.
    pub r_max: usize,
    /// Region proposals per element.
    pub sweeps: usize,
    /// Heuristic restarts per discrete solve.
    pub restarts: usize,
    /// Base RNG seed.
    pub seed: u64,
    /// Outer iteration cap.
    pub max_outer: usize,
    /// Output directory (used by the command-line driver).
    pub output_dir: String,
    /// Field snapshot stride in outer iterations.
    pub snapshot_stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 32,
            alpha: 5e-5,
            rho0: 1e-2,
            gamma: 2.0,
            beta: 0.9,
            zeta: 0.5,
            c: 2.0,
            delta_tol: 1e-2,
            v_max: 0.4,
            simp_delta: 1e-3,
            simp_p: 3.0,
            source: 1.0,
            tol_inner: 1e-6,
            max_inner: 500,
            tol_lin: 1e-10,
            q: 0.7,
            r_max: 64,
            sweeps: 20,
            restarts: 4,
            seed: 0,
            max_outer: 200,
            output_dir: "out".into(),
            snapshot_stride: 10,
        }
    }
}

fn require(ok: bool, name: &'static str, reason: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: reason.into(),
        })
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        require(self.n >= 1, "n", "must be at least 1")?;
        require(self.alpha >= 0.0, "alpha", "must be nonnegative")?;
        require(self.rho0 > 0.0, "rho0", "must be positive")?;
        require(self.gamma > 1.0, "gamma", "must be greater than 1")?;
        require(
            self.beta > 0.0 && self.beta < 1.0,
            "beta",
            "must lie in (0, 1)",
        )?;
        require(
            self.zeta > 0.0 && self.zeta < 1.0,
            "zeta",
            "must lie in (0, 1)",
        )?;
        require(self.c > 1.0, "c", "must be greater than 1")?;
        require(self.delta_tol > 0.0, "delta_tol", "must be positive")?;
        require(
            self.v_max > 0.0 && self.v_max <= 1.0,
            "v_max",
            "must lie in (0, 1]",
        )?;
        require(
            self.simp_delta > 0.0 && self.simp_delta < 1.0,
            "simp_delta",
            "must lie in (0, 1)",
        )?;
        require(self.simp_p >= 1.0, "simp_p", "must be at least 1")?;
        require(self.source.is_finite(), "source", "must be finite")?;
        require(self.tol_inner > 0.0, "tol_inner", "must be positive")?;
        require(self.max_inner >= 1, "max_inner", "must be at least 1")?;
        require(self.tol_lin > 0.0, "tol_lin", "must be positive")?;
        require(self.q > 0.0 && self.q < 1.0, "q", "must lie in (0, 1)")?;
        require(self.r_max >= 1, "r_max", "must be at least 1")?;
        require(self.sweeps >= 1, "sweeps", "must be at least 1")?;
        require(self.restarts >= 1, "restarts", "must be at least 1")?;
        require(self.max_outer >= 1, "max_outer", "must be at least 1")?;
        require(
            self.snapshot_stride >= 1,
            "snapshot_stride",
            "must be at least 1",
        )?;
        Ok(())
    }

    pub fn funnel(&self) -> FunnelParams {
        FunnelParams {
            beta: self.beta,
            zeta: self.zeta,
            gamma: self.gamma,
            c: self.c,
            delta_tol: self.delta_tol,
        }
    }

    pub fn simp(&self) -> Result<SimpParams> {
        SimpParams::new(self.simp_delta, self.simp_p)
    }

    pub fn inner_settings(&self) -> InnerSolveSettings {
        InnerSolveSettings {
            tol_inner: self.tol_inner,
            max_inner: self.max_inner,
            ..InnerSolveSettings::default()
        }
    }

    pub fn heuristic(&self) -> HeuristicParams {
        HeuristicParams {
            continuation: self.q,
            region_cap: self.r_max,
            sweeps: self.sweeps,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverConfig::default().validate().unwrap();
    }

    #[test]
    fn beta_out_of_range_is_named() {
        let cfg = SolverConfig {
            beta: 1.5,
            ..SolverConfig::default()
        };
        match cfg.validate() {
            Err(Error::InvalidParameter {
                name: "beta",
                reason,
            }) => {
                assert!(reason.contains("(0, 1)"));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn v_max_bounds() {
        for bad in [0.0, -0.2, 1.2] {
            let cfg = SolverConfig {
                v_max: bad,
                ..SolverConfig::default()
            };
            assert!(cfg.validate().is_err(), "v_max = {bad}");
        }
        let cfg = SolverConfig {
            v_max: 1.0,
            ..SolverConfig::default()
        };
        cfg.validate().unwrap();
    }
}
