//! Fixed parameter sets shared by the criterion benches.

use shrinkdist::{EstimatorKind, ModelPoint, TuningPlan};

/// The three plotted configurations: n = 40, θ = 0.16, η = 0.05, a = 3.7.
pub fn figure_config() -> (ModelPoint, TuningPlan) {
    (
        ModelPoint::new(40, 0.16).expect("valid point"),
        TuningPlan::new(0.05, 3.7).expect("valid tuning"),
    )
}

pub const KINDS: [EstimatorKind; 3] = EstimatorKind::ALL;
