//! Error type shared across the solver modules.

use thiserror::Error;

/// Errors produced by mesh construction, assembly, the linear solver and the
/// optimization loops.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("element {element} is degenerate (area {area:.3e})")]
    DegenerateElement { element: usize, area: f64 },

    #[error("triangle is degenerate (area {area:.3e})")]
    DegenerateTriangle { area: f64 },

    #[error("design value {value} at element {element} lies outside [0, 1]")]
    DesignOutOfRange { element: usize, value: f64 },

    #[error("design value {value} at element {element} is not binary")]
    NonBinaryDesign { element: usize, value: f64 },

    #[error("stiffness matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },

    #[error("linear solve residual {relative:.3e} exceeds tolerance {tol:.3e}")]
    LinearSolveResidual { relative: f64, tol: f64 },

    #[error("state is stale for this design: residual {relative:.3e} > {tol:.3e}")]
    StaleState { relative: f64, tol: f64 },

    #[error("infeasible starting point: {0}")]
    InfeasibleStart(String),

    #[error("instance with {size} elements exceeds enumeration limit {max}")]
    InstanceTooLarge { size: usize, max: usize },

    #[error("subproblem failed at outer iteration {iteration}: {source}")]
    Subproblem {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
