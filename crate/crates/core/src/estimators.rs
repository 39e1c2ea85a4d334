//! Hard-thresholding, soft-thresholding (LASSO) and SCAD point estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};

/// Default SCAD shape parameter.
pub const DEFAULT_SCAD_A: f64 = 3.7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPlan {
    pub eta: f64,
    pub scad_a: f64,
}

impl TuningPlan {
    pub fn new(eta: f64, scad_a: f64) -> Result<Self> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(ShrinkError::InvalidTuning(format!("eta > 0 violated (eta = {eta})")));
        }
        if !(scad_a.is_finite() && scad_a > 2.0) {
            return Err(ShrinkError::InvalidTuning(format!(
                "scad_a > 2 violated (scad_a = {scad_a})"
            )));
        }
        Ok(TuningPlan { eta, scad_a })
    }

    /// Threshold `eta` with the default SCAD shape.
    pub fn with_eta(eta: f64) -> Result<Self> {
        Self::new(eta, DEFAULT_SCAD_A)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorKind {
    Hard,
    Soft,
    Scad,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::Hard, EstimatorKind::Soft, EstimatorKind::Scad];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Hard => "hard",
            EstimatorKind::Soft => "soft",
            EstimatorKind::Scad => "scad",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = ShrinkError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hard" => Ok(EstimatorKind::Hard),
            "soft" | "lasso" => Ok(EstimatorKind::Soft),
            "scad" => Ok(EstimatorKind::Scad),
            other => Err(ShrinkError::InvalidArgument(format!("unknown estimator kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Evaluates the estimator at the sample mean `ybar`.
///
/// `|ȳ| = η` maps to zero for every kind. SCAD branches are
/// `|ȳ| ≤ 2η` (soft), `2η < |ȳ| ≤ aη` (interpolation) and `|ȳ| > aη` (identity).
pub fn estimate(kind: EstimatorKind, ybar: f64, tuning: &TuningPlan) -> f64 {
    let eta = tuning.eta;
    let ay = ybar.abs();
    match kind {
        EstimatorKind::Hard => {
            if ay > eta {
                ybar
            } else {
                0.0
            }
        }
        EstimatorKind::Soft => soft(ybar, eta),
        EstimatorKind::Scad => {
            let a = tuning.scad_a;
            if ay <= 2.0 * eta {
                soft(ybar, eta)
            } else if ay <= a * eta {
                let mid = ((a - 1.0) * ybar - sign(ybar) * a * eta) / (a - 2.0);
                // keep the soft ≤ scad ≤ hard ordering exact under rounding
                let s = soft(ybar, eta);
                if ybar > 0.0 {
                    mid.clamp(s, ybar)
                } else {
                    mid.clamp(ybar, s)
                }
            } else {
                ybar
            }
        }
    }
}

// Written as hard − sign·η so the soft/hard relation holds bit for bit.
#[inline]
fn soft(ybar: f64, eta: f64) -> f64 {
    if ybar.abs() > eta {
        ybar - sign(ybar) * eta
    } else {
        0.0
    }
}

/// Penalized least-squares objective with `Σ(y_t − θ)²` replaced by `n(ȳ − θ)²`.
pub fn penalized_objective(
    kind: EstimatorKind,
    theta: f64,
    ybar: f64,
    n: u64,
    tuning: &TuningPlan,
) -> Result<f64> {
    if !theta.is_finite() || !ybar.is_finite() {
        return Err(ShrinkError::NonFinite(format!("theta = {theta}, ybar = {ybar}")));
    }
    let nf = n as f64;
    let eta = tuning.eta;
    let fit = nf * (ybar - theta).powi(2);
    match kind {
        EstimatorKind::Hard => {
            let inside = if theta.abs() < eta {
                (theta.abs() - eta).powi(2)
            } else {
                0.0
            };
            Ok(fit + nf * (eta * eta - inside))
        }
        EstimatorKind::Soft => Ok(fit + 2.0 * nf * eta * theta.abs()),
        EstimatorKind::Scad => Err(ShrinkError::ObjectiveUnavailable),
    }
}

/// `estimate(kind, ȳ) = 0` exactly when `|ȳ| ≤` this value, for every kind.
pub fn zero_event_threshold(tuning: &TuningPlan) -> f64 {
    tuning.eta
}
