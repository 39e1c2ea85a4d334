//! Hard-thresholding, soft-thresholding (LASSO) and SCAD estimators in the
//! Gaussian location model: exact finite-sample laws, selection
//! probabilities, moving-parameter limits, Monte Carlo checks and two-point
//! lower bounds for estimating the sampling distribution.

pub mod error;
pub mod estimators;
pub mod ext_real;
pub mod finite_dist;
pub mod impossibility;
pub mod limits;
pub mod mixture;
pub mod montecarlo;
pub mod normal;
pub mod quad;
pub mod report;
pub mod selection;

pub use error::{Result, ShrinkError};
pub use estimators::{estimate, penalized_objective, zero_event_threshold, EstimatorKind, TuningPlan};
pub use ext_real::ExtReal;
pub use finite_dist::{atom_weight, finite_sample_dist, rescaled_dist, scaled_risk, ModelPoint};
pub use mixture::{Atom, GaussPiece, MixtureDistribution};
pub use report::{Cell, ExperimentReport};
pub use selection::{
    limit_selection_probability, selection_convergence_table, selection_probability, RegimeSpec, ThetaRule,
    TuningPath,
};
pub use limits::{
    canonical_scenarios, consistent_limit, conservative_limit, rescaled_limit, weak_convergence_check, ConvergenceMode,
    LimitLaw, Scaling, Scenario,
};
pub use montecarlo::{
    ks_distance, rate_sharpness, simulate_estimates, uniform_rate_bound, uniform_rate_experiment, EmpiricalCdf, SimConfig,
    ThetaGridRule,
};
pub use impossibility::{
    estimand_gap, estimator_worst_case, minimax_lower_bound, rescaled_lower_bound, CdfEstimatorSpec, MRule,
    TwoPointProblem,
};
