// negated comparisons keep NaN parameters from validating; index loops
// mirror the banded matrix algebra
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

//! Binary topology optimization of a two-material heat sink.
//!
//! The design problem minimizes thermal compliance plus a weighted
//! total-variation term over binary element densities, subject to the
//! discretized heat equation and a volume budget. It is solved by an
//! alternating direction scheme: a continuous SIMP-relaxed subproblem
//! (projected gradient descent), a discrete TV/penalty subproblem
//! (randomized connected-region search with an exact oracle for tiny
//! instances), and a funnel-adaptive penalty schedule coupling the two.

pub mod adjoint;
pub mod admm;
pub mod config;
pub mod cont_solver;
pub mod disc_solver;
pub mod error;
pub mod fem;
pub mod field;
pub mod linalg;
pub mod mesh;

pub use config::SolverConfig;
pub use error::{Error, Result};
pub use field::DesignField;
