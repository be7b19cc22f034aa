use thiserror::Error;

/// Failures raised by the solvers and the simulator.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid model: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("silent system of dimension {dim} exceeds the configured maximum {max}")]
    Capacity { dim: usize, max: usize },

    #[error("linear system is singular (reciprocal condition number {rcond:e})")]
    Singular { rcond: f64 },

    #[error("quantity diverges: {0}")]
    Divergence(String),

    #[error("no convergence after {iterations} refinements (last change {last_change:e})")]
    NonConvergence { iterations: usize, last_change: f64 },

    #[error("could not bracket the target {target} after {expansions} expansions")]
    Bracket { target: f64, expansions: usize },

    #[error("finite-difference step {step:e} is too small for quadrature tolerance {tolerance:e}")]
    StepTooSmall { step: f64, tolerance: f64 },

    #[error("truncation bound {bound} is too small: greedy policy is silent at the edge")]
    BoundTooSmall { bound: i64 },

    #[error("state overflow at step {step}: the never-transmit process explodes")]
    Overflow { step: u64 },

    #[error("internal consistency violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
