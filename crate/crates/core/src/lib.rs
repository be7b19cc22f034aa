//! Optimal threshold policies for remote estimation of autoregressive
//! processes under communication costs or rate constraints.
//!
//! The integer-valued model is solved exactly by dense linear algebra, the
//! real-valued model by Nyström quadrature. A Monte-Carlo simulator and a
//! value-iteration oracle provide independent checks.

// Negated comparisons reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod birth_death;
pub mod dp;
pub mod error;
pub mod fredholm;
pub mod linalg;
pub mod model;
pub mod quadrature;
pub mod sim;
pub mod solver_a;
pub mod solver_b;

pub use baselines::{
    best_rational, periodic_distortion, periodic_pattern, stationary_stopping_distortion,
    steering_policy_step, time_sharing_schedule, PeriodicFamily, SteeringCounters,
};
pub use birth_death::{bd_closed_form, bd_lambda_average, bd_q_entry};
pub use dp::{
    compactification_radius, default_bound, policy_evaluate_fixed_point, value_iterate,
    value_iterate_with_bound, TruncatedDP,
};
pub use error::{Error, Result};
pub use fredholm::{fredholm_solve, fredholm_solve_many, FredholmOptions, FredholmSolution};
pub use model::{
    estimator_step, validate_spec, Cost, CurveKind, CurvePoint, CurveShape, CurveSource,
    DiscountFactor, DistortionFn, IntegerPmf, ModelSpec, ModelSpecA, ModelSpecB, PerfPoint,
    Provenance, RandomizedThresholdPolicy, SmoothPdf, ThresholdPolicy, TradeoffCurve,
};
pub use quadrature::QuadratureGrid;
pub use sim::{discounted_horizon, simulate, PolicySpec, SimConfig, SimResult};
pub use solver_a::{
    build_silent_system, corner_lambdas, optimal_constrained, optimal_costly, performance,
    performance_table, randomized_performance, solve_lm, tradeoff_curve, ConstrainedOptimum,
    Corner, CostlyOptimum, LmVectors, SilentSystem,
};
pub use solver_b::{
    algorithm1_costly, algorithm2_constrained, default_step, dk_derivatives, gauss_markov_rescale,
    lambda_of_k, performance_b, performance_b_with, solve_lm_b, tradeoff_curve_b,
    ConstrainedOptimumB, CostlyOptimumB, LmFunctions,
};
