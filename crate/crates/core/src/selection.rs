//! Model-selection probabilities P(θ̂ = 0) and their moving-parameter limits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};
use crate::estimators::{TuningPlan, DEFAULT_SCAD_A};
use crate::ext_real::ExtReal;
use crate::finite_dist::{atom_weight, ModelPoint};
use crate::normal::{cdf_ext, interval_prob};
use crate::report::ExperimentReport;

/// Limits along a sequence `(θ_n, η_n)`:
/// `e = lim √nη_n`, `ν = lim √nθ_n`, `ζ = lim θ_n/η_n` and the boundary offset `r`
/// (`lim √n(η_n − ζθ_n)` at `|ζ| = 1`, `lim √n(aη_n − sign(ζ)θ_n)` at `|ζ| = a`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub e: ExtReal,
    pub nu: ExtReal,
    pub zeta: Option<ExtReal>,
    pub r: Option<ExtReal>,
}

impl RegimeSpec {
    /// `e < ∞`: conservative tuning.
    pub fn conservative(e: f64, nu: ExtReal) -> Result<Self> {
        if !(e.is_finite() && e >= 0.0) {
            return Err(ShrinkError::InvalidRegime(format!("conservative tuning needs 0 <= e < inf, got {e}")));
        }
        Ok(RegimeSpec { e: ExtReal::Finite(e), nu, zeta: None, r: None })
    }

    /// `e = ∞`: consistent tuning. For `ζ ≠ 0`, `ν` must equal `sign(ζ)∞`.
    pub fn consistent(zeta: ExtReal, nu: ExtReal, r: Option<ExtReal>) -> Result<Self> {
        let s = RegimeSpec { e: ExtReal::PosInf, nu, zeta: Some(zeta), r };
        s.validate()?;
        Ok(s)
    }

    /// Consistent regime with `ν` implied by `ζ ≠ 0`.
    pub fn consistent_zeta(zeta: ExtReal, r: Option<ExtReal>) -> Result<Self> {
        if zeta == ExtReal::ZERO {
            return Err(ShrinkError::Underdetermined("zeta = 0 does not determine nu".into()));
        }
        Self::consistent(zeta, ExtReal::signed_infinity(zeta.signum()), r)
    }

    pub fn is_consistent(&self) -> bool {
        self.e == ExtReal::PosInf
    }

    pub fn validate(&self) -> Result<()> {
        if self.e < ExtReal::ZERO {
            return Err(ShrinkError::InvalidRegime(format!("e >= 0 violated (e = {})", self.e)));
        }
        match (self.is_consistent(), self.zeta) {
            (true, None) => Err(ShrinkError::Underdetermined("consistent tuning needs zeta".into())),
            (true, Some(z)) if z != ExtReal::ZERO && self.nu != ExtReal::signed_infinity(z.signum()) => {
                Err(ShrinkError::InvalidRegime(format!(
                    "zeta = {z} with consistent tuning forces nu = sign(zeta)inf, got nu = {}",
                    self.nu
                )))
            }
            _ => Ok(()),
        }
    }

    /// `ζ`, required for consistent regimes.
    pub fn zeta(&self) -> Result<ExtReal> {
        self.zeta.ok_or_else(|| ShrinkError::Underdetermined("zeta not set".into()))
    }

    /// `r`, required at a regime boundary.
    pub fn r_at_boundary(&self, boundary: f64) -> Result<ExtReal> {
        self.r.ok_or_else(|| {
            ShrinkError::Underdetermined(format!("|zeta| = {boundary} requires the boundary offset r"))
        })
    }
}

/// Canonical tuning family `η_n = C·n^{−γ}`, `0 < γ ≤ ½`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningPath {
    pub c: f64,
    pub gamma: f64,
    pub scad_a: f64,
}

impl TuningPath {
    pub fn new(c: f64, gamma: f64) -> Result<Self> {
        Self::with_a(c, gamma, DEFAULT_SCAD_A)
    }

    pub fn with_a(c: f64, gamma: f64, scad_a: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ShrinkError::InvalidTuning(format!("C > 0 violated (C = {c})")));
        }
        if !(gamma > 0.0 && gamma <= 0.5) {
            return Err(ShrinkError::InvalidTuning(format!("0 < gamma <= 1/2 violated (gamma = {gamma})")));
        }
        TuningPlan::new(c, scad_a)?;
        Ok(TuningPath { c, gamma, scad_a })
    }

    /// Conservative family `η_n = e/√n`.
    pub fn conservative(e: f64) -> Result<Self> {
        Self::new(e, 0.5)
    }

    pub fn eta(&self, n: u64) -> f64 {
        self.c * (n as f64).powf(-self.gamma)
    }

    pub fn plan(&self, n: u64) -> Result<TuningPlan> {
        TuningPlan::new(self.eta(n), self.scad_a)
    }

    /// `lim √nη_n`.
    pub fn e_limit(&self) -> ExtReal {
        if self.gamma == 0.5 {
            ExtReal::Finite(self.c)
        } else {
            ExtReal::PosInf
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.gamma < 0.5
    }
}

/// A sequence `θ_n` built against `n^{−½}` or against `η_n`.
///
/// `drift` adds `drift·n^{−3/4}`, which changes no limit but makes the
/// approach to it non-trivial at every `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ThetaRule {
    /// `θ_n = θ`.
    Fixed { theta: f64 },
    /// `θ_n = ν/√n`.
    Local {
        nu: f64,
        #[serde(default)]
        drift: f64,
    },
    /// `θ_n = ζη_n + offset/√n`.
    EtaMultiple {
        zeta: f64,
        offset: f64,
        #[serde(default)]
        drift: f64,
    },
}

impl ThetaRule {
    pub fn local(nu: f64) -> Self {
        ThetaRule::Local { nu, drift: 0.0 }
    }

    pub fn eta_multiple(zeta: f64, offset: f64) -> Self {
        ThetaRule::EtaMultiple { zeta, offset, drift: 0.0 }
    }

    /// Sequence sitting on the boundary `|ζ| ∈ {1, a}` with limiting offset `r`.
    pub fn boundary(zeta: f64, r: f64) -> Self {
        Self::eta_multiple(zeta, -zeta.signum() * r)
    }

    pub fn with_drift(self, d: f64) -> Self {
        match self {
            ThetaRule::Fixed { .. } => self,
            ThetaRule::Local { nu, .. } => ThetaRule::Local { nu, drift: d },
            ThetaRule::EtaMultiple { zeta, offset, .. } => ThetaRule::EtaMultiple { zeta, offset, drift: d },
        }
    }

    pub fn theta(&self, n: u64, eta: f64) -> f64 {
        let nf = n as f64;
        let s = nf.sqrt();
        match *self {
            ThetaRule::Fixed { theta } => theta,
            ThetaRule::Local { nu, drift } => nu / s + drift * nf.powf(-0.75),
            ThetaRule::EtaMultiple { zeta, offset, drift } => zeta * eta + offset / s + drift * nf.powf(-0.75),
        }
    }

    /// The limiting regime along `path`.
    pub fn regime(&self, path: &TuningPath) -> Result<RegimeSpec> {
        let sgn_inf = |x: f64| if x == 0.0 { ExtReal::ZERO } else { ExtReal::signed_infinity(x) };
        match (path.e_limit(), *self) {
            (ExtReal::Finite(e), ThetaRule::Fixed { theta }) => RegimeSpec::conservative(e, sgn_inf(theta)),
            (ExtReal::Finite(e), ThetaRule::Local { nu, .. }) => RegimeSpec::conservative(e, ExtReal::new(nu)?),
            (ExtReal::Finite(e), ThetaRule::EtaMultiple { zeta, offset, .. }) => {
                RegimeSpec::conservative(e, ExtReal::new(zeta * e + offset)?)
            }
            (_, ThetaRule::Fixed { theta }) => {
                RegimeSpec::consistent(sgn_inf(theta), sgn_inf(theta), None)
            }
            (_, ThetaRule::Local { nu, .. }) => RegimeSpec::consistent(ExtReal::ZERO, ExtReal::new(nu)?, None),
            (_, ThetaRule::EtaMultiple { zeta, offset, .. }) if zeta == 0.0 => {
                RegimeSpec::consistent(ExtReal::ZERO, ExtReal::new(offset)?, None)
            }
            (_, ThetaRule::EtaMultiple { zeta, offset, .. }) => RegimeSpec::consistent(
                ExtReal::new(zeta)?,
                ExtReal::signed_infinity(zeta),
                Some(ExtReal::new(-zeta.signum() * offset)?),
            ),
        }
    }
}

/// P_{n,θ}(θ̂ = 0), shared with [`atom_weight`].
pub fn selection_probability(point: &ModelPoint, tuning: &TuningPlan) -> f64 {
    atom_weight(point, tuning)
}

/// Limit of P(θ̂ = 0) along the regime.
pub fn limit_selection_probability(regime: &RegimeSpec) -> Result<f64> {
    regime.validate()?;
    match regime.e {
        ExtReal::Finite(e) => Ok(match regime.nu {
            ExtReal::Finite(nu) => interval_prob(-nu - e, -nu + e),
            _ => 0.0,
        }),
        _ => {
            let z = regime.zeta()?.abs();
            if z < ExtReal::Finite(1.0) {
                Ok(1.0)
            } else if z == ExtReal::Finite(1.0) {
                Ok(cdf_ext(regime.r_at_boundary(1.0)?))
            } else {
                Ok(0.0)
            }
        }
    }
}

/// Rows `n, theta, eta, prob, limit, gap` along a tuning path and θ_n rule.
pub fn selection_convergence_table(
    path: &TuningPath,
    rule: &ThetaRule,
    n_list: &[u64],
) -> Result<ExperimentReport> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ShrinkError::InvalidArgument("n_list must be strictly increasing".into()));
    }
    let limit = limit_selection_probability(&rule.regime(path)?)?;
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let eta = path.eta(n);
            let theta = rule.theta(n, eta);
            let p = selection_probability(&ModelPoint::new(n, theta)?, &path.plan(n)?);
            Ok(vec![n.into(), theta.into(), eta.into(), p.into(), limit.into(), (p - limit).abs().into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = ExperimentReport::new("selection", &["n", "theta", "eta", "prob", "limit", "gap"]);
    rep.rows = rows;
    rep.meta = serde_json::json!({ "path": path, "theta_rule": rule });
    Ok(rep)
}
