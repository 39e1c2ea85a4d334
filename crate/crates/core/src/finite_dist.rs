//! Exact finite-sample laws of `√n(θ̂ − θ)` and `(θ̂ − θ)/η`, and the scaled risk.
//!
//! With `T = √nθ` and `E = √nη` every law is an atom at `−T` of weight
//! `Φ(−T + E) − Φ(−T − E)` plus Gaussian pieces. Hard excises `|x + T| ≤ E`
//! from φ, Soft shifts the two halves by `∓E`, SCAD has six pieces with
//! breakpoints at `−T ± E` and `−T ± aE`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};
use crate::estimators::{EstimatorKind, TuningPlan};
use crate::ext_real::ExtReal;
use crate::mixture::{Atom, GaussPiece, MixtureDistribution};
use crate::normal::interval_prob;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub n: u64,
    pub theta: f64,
}

impl ModelPoint {
    pub fn new(n: u64, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(ShrinkError::InvalidArgument("n >= 1 violated".into()));
        }
        if !theta.is_finite() {
            return Err(ShrinkError::NonFinite(format!("theta = {theta}")));
        }
        Ok(ModelPoint { n, theta })
    }

    pub fn sqrt_n(&self) -> f64 {
        (self.n as f64).sqrt()
    }

    /// `(√nθ, √nη)`
    pub fn scaled(&self, tuning: &TuningPlan) -> (f64, f64) {
        let s = self.sqrt_n();
        (s * self.theta, s * tuning.eta)
    }
}

/// `Φ(−T + E) − Φ(−T − E)`, the probability that the estimator is exactly zero.
pub fn zero_mass(t: f64, e: f64) -> f64 {
    interval_prob(-t - e, -t + e)
}

/// P_{n,θ}(θ̂ = 0); the same for all three estimators.
pub fn atom_weight(point: &ModelPoint, tuning: &TuningPlan) -> f64 {
    let (t, e) = point.scaled(tuning);
    zero_mass(t, e)
}

fn push(pieces: &mut Vec<GaussPiece>, coeff: f64, slope: f64, shift: f64, lo: f64, hi: f64) -> Result<()> {
    let (lo, hi) = (ExtReal::new(lo)?, ExtReal::new(hi)?);
    // an interval can only be empty here through floating-point collapse of −T ± E
    if lo < hi {
        pieces.push(GaussPiece::new(coeff, slope, shift, lo, hi)?);
    }
    Ok(())
}

/// The law of `√n(θ̂ − θ)` written in terms of `T = √nθ`, `E = √nη` and `a`.
///
/// Also the conservative limit law when `(T, E)` is replaced by `(ν, e)`.
pub fn law_from_scaled(kind: EstimatorKind, t: f64, e: f64, a: f64) -> Result<MixtureDistribution> {
    if !t.is_finite() || !e.is_finite() || e < 0.0 {
        return Err(ShrinkError::InvalidArgument(format!("scaled parameters T = {t}, E = {e}")));
    }
    let (ninf, pinf) = (f64::NEG_INFINITY, f64::INFINITY);
    let atoms = vec![Atom { loc: ExtReal::Finite(0.0 - t), weight: zero_mass(t, e) }];
    let mut p = Vec::new();
    match kind {
        EstimatorKind::Hard => {
            push(&mut p, 1.0, 1.0, 0.0, ninf, -t - e)?;
            push(&mut p, 1.0, 1.0, 0.0, -t + e, pinf)?;
        }
        EstimatorKind::Soft => {
            push(&mut p, 1.0, 1.0, -e, ninf, -t)?;
            push(&mut p, 1.0, 1.0, e, -t, pinf)?;
        }
        EstimatorKind::Scad => {
            if !(a.is_finite() && a > 2.0) {
                return Err(ShrinkError::InvalidTuning(format!("scad_a > 2 violated (scad_a = {a})")));
            }
            let c2 = (a - 2.0) / (a - 1.0);
            push(&mut p, 1.0, 1.0, e, -t, -t + e)?;
            push(&mut p, c2, c2, (a * e - t) / (a - 1.0), -t + e, -t + a * e)?;
            push(&mut p, 1.0, 1.0, 0.0, -t + a * e, pinf)?;
            push(&mut p, 1.0, 1.0, -e, -t - e, -t)?;
            push(&mut p, c2, c2, (-t - a * e) / (a - 1.0), -t - a * e, -t - e)?;
            push(&mut p, 1.0, 1.0, 0.0, ninf, -t - a * e)?;
        }
    }
    MixtureDistribution::new(atoms, p)
}

/// Law of `√n(θ̂ − θ)` under `P_{n,θ}`.
pub fn finite_sample_dist(
    kind: EstimatorKind,
    point: &ModelPoint,
    tuning: &TuningPlan,
) -> Result<MixtureDistribution> {
    let (t, e) = point.scaled(tuning);
    law_from_scaled(kind, t, e, tuning.scad_a)
}

/// Law of `(θ̂ − θ)/η`, i.e. `G(x) = F(√nη·x)`.
pub fn rescaled_dist(
    kind: EstimatorKind,
    point: &ModelPoint,
    tuning: &TuningPlan,
) -> Result<MixtureDistribution> {
    let (_, e) = point.scaled(tuning);
    finite_sample_dist(kind, point, tuning)?.scaled(1.0 / e)
}

/// `E[n(θ̂ − θ)²]` from closed-form truncated-normal moments.
pub fn scaled_risk(kind: EstimatorKind, point: &ModelPoint, tuning: &TuningPlan) -> Result<f64> {
    Ok(finite_sample_dist(kind, point, tuning)?.second_moment())
}
