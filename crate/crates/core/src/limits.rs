//! Limit laws of the estimators under moving parameters, and convergence checks.
//!
//! Conservative tuning (`√nη_n → e < ∞`) keeps the finite-sample shape with
//! `(√nθ, √nη)` replaced by `(ν, e)`. Consistent tuning (`√nη_n → ∞`) branches on
//! `ζ = lim θ_n/η_n` against 1 (Hard) or `a` (SCAD); atoms may sit at ±∞.
//! The `η⁻¹`-rescaled limits are combinations of at most two point masses.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};
use crate::estimators::EstimatorKind;
use crate::ext_real::ExtReal;
use crate::finite_dist::{finite_sample_dist, law_from_scaled, rescaled_dist, ModelPoint};
use crate::mixture::{Atom, GaussPiece, MixtureDistribution};
use crate::normal::cdf_ext;
use crate::quad;
use crate::report::ExperimentReport;
use crate::selection::{RegimeSpec, ThetaRule, TuningPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceMode {
    Weak,
    TotalVariation,
    MassEscape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitLaw {
    #[serde(flatten)]
    pub dist: MixtureDistribution,
    pub mode: ConvergenceMode,
}

impl LimitLaw {
    fn new(dist: MixtureDistribution, mode: ConvergenceMode) -> Self {
        let mode = if dist.escaped_mass() > 0.0 { ConvergenceMode::MassEscape } else { mode };
        LimitLaw { dist, mode }
    }

    fn point(loc: ExtReal) -> Self {
        Self::new(MixtureDistribution::point_mass(loc), ConvergenceMode::Weak)
    }

    /// Mass on ℝ, excluding atoms at ±∞.
    pub fn finite_mass(&self) -> f64 {
        self.dist.total_mass() - self.dist.escaped_mass()
    }
}

fn check_a(kind: EstimatorKind, a: f64) -> Result<()> {
    if kind == EstimatorKind::Scad && !(a.is_finite() && a > 2.0) {
        return Err(ShrinkError::InvalidTuning(format!("scad_a > 2 violated (scad_a = {a})")));
    }
    Ok(())
}

/// Limit of `√n(θ̂ − θ_n)` when `√nθ_n → ν` and `√nη_n → e < ∞`.
pub fn conservative_limit(kind: EstimatorKind, nu: ExtReal, e: f64, scad_a: f64) -> Result<LimitLaw> {
    check_a(kind, scad_a)?;
    if !(e.is_finite() && e >= 0.0) {
        return Err(ShrinkError::InvalidRegime(format!("conservative limit needs 0 <= e < inf, got {e}")));
    }
    match nu {
        ExtReal::Finite(v) if e > 0.0 => {
            Ok(LimitLaw::new(law_from_scaled(kind, v, e, scad_a)?, ConvergenceMode::Weak))
        }
        _ => {
            // atomic part vanishes; convergence is in total variation
            let mean = if kind == EstimatorKind::Soft { -nu.signum() * e } else { 0.0 };
            Ok(LimitLaw::new(MixtureDistribution::normal(mean), ConvergenceMode::TotalVariation))
        }
    }
}

fn require_consistent(regime: &RegimeSpec) -> Result<ExtReal> {
    regime.validate()?;
    if !regime.is_consistent() {
        return Err(ShrinkError::InvalidRegime("this limit needs consistent tuning (e = inf)".into()));
    }
    regime.zeta()
}

/// Limit of `√n(θ̂ − θ_n)` under consistent tuning.
pub fn consistent_limit(kind: EstimatorKind, regime: &RegimeSpec, scad_a: f64) -> Result<LimitLaw> {
    check_a(kind, scad_a)?;
    let zeta = require_consistent(regime)?;
    let nu = regime.nu;
    let az = zeta.abs();
    let normal = || LimitLaw::new(MixtureDistribution::normal(0.0), ConvergenceMode::TotalVariation);
    match kind {
        EstimatorKind::Soft => Ok(LimitLaw::point(-nu)),
        EstimatorKind::Hard => {
            let one = ExtReal::Finite(1.0);
            if az < one {
                Ok(LimitLaw::point(-nu))
            } else if az > one {
                Ok(normal())
            } else {
                let r = regime.r_at_boundary(1.0)?;
                let w = cdf_ext(r);
                let escape = ExtReal::signed_infinity(-zeta.signum());
                // φ(u) on ζu > r
                let (lo, hi) = if zeta.signum() > 0.0 { (r, ExtReal::PosInf) } else { (ExtReal::NegInf, -r) };
                let mut pieces = Vec::new();
                if lo < hi {
                    pieces.push(GaussPiece::normal(lo, hi)?);
                }
                let atoms = if w > 0.0 { vec![Atom { loc: escape, weight: w }] } else { vec![] };
                Ok(LimitLaw::new(MixtureDistribution::new(atoms, pieces)?, ConvergenceMode::TotalVariation))
            }
        }
        EstimatorKind::Scad => {
            let a = ExtReal::Finite(scad_a);
            if az < a {
                return Ok(LimitLaw::point(-nu));
            }
            if az > a {
                return Ok(normal());
            }
            let r = regime.r_at_boundary(scad_a)?;
            let s = zeta.signum();
            match r {
                ExtReal::PosInf => Ok(LimitLaw::point(-nu)),
                ExtReal::NegInf => Ok(normal()),
                ExtReal::Finite(r) => {
                    let c2 = (scad_a - 2.0) / (scad_a - 1.0);
                    let shift = s * r / (scad_a - 1.0);
                    let fr = ExtReal::Finite(s * r);
                    // c₂ φ(((a−2)u + sign(ζ)r)/(a−1)) on sign(ζ)u ≤ r, φ(u) beyond
                    let pieces = if s > 0.0 {
                        vec![
                            GaussPiece::new(c2, c2, shift, ExtReal::NegInf, fr)?,
                            GaussPiece::normal(fr, ExtReal::PosInf)?,
                        ]
                    } else {
                        vec![
                            GaussPiece::new(c2, c2, shift, fr, ExtReal::PosInf)?,
                            GaussPiece::normal(ExtReal::NegInf, fr)?,
                        ]
                    };
                    Ok(LimitLaw::new(MixtureDistribution::new(vec![], pieces)?, ConvergenceMode::TotalVariation))
                }
            }
        }
    }
}

/// Limit of `(θ̂ − θ_n)/η_n` under consistent tuning.
pub fn rescaled_limit(kind: EstimatorKind, regime: &RegimeSpec, scad_a: f64) -> Result<LimitLaw> {
    check_a(kind, scad_a)?;
    let zeta = require_consistent(regime)?;
    let s = zeta.signum();
    let az = zeta.abs();
    let soft_loc = || -s * az.to_f64().min(1.0);
    let loc = match kind {
        EstimatorKind::Soft => soft_loc(),
        EstimatorKind::Hard => {
            let one = ExtReal::Finite(1.0);
            if az < one {
                -zeta.to_f64()
            } else if az > one {
                0.0
            } else {
                let w = cdf_ext(regime.r_at_boundary(1.0)?);
                let atoms = vec![
                    Atom { loc: ExtReal::Finite(-s), weight: w },
                    Atom { loc: ExtReal::ZERO, weight: 1.0 - w },
                ];
                return Ok(LimitLaw::new(MixtureDistribution::new(atoms, vec![])?, ConvergenceMode::Weak));
            }
        }
        EstimatorKind::Scad => {
            if az <= ExtReal::Finite(2.0) {
                soft_loc()
            } else if az < ExtReal::Finite(scad_a) {
                -s * (scad_a - az.to_f64()) / (scad_a - 2.0)
            } else {
                0.0
            }
        }
    };
    // −0.0 and 0.0 are the same atom
    Ok(LimitLaw::point(ExtReal::Finite(loc + 0.0)))
}

/// ∫|f − g| over the absolutely continuous parts, by quadrature on breakpoint panels.
pub fn ac_l1_distance(f: &MixtureDistribution, g: &MixtureDistribution) -> f64 {
    let mut breaks = f.breakpoints();
    breaks.extend(g.breakpoints());
    breaks.sort_by(f64::total_cmp);
    let (lo, hi) = match (breaks.first(), breaks.last()) {
        (Some(&lo), Some(&hi)) => (lo - 60.0, hi + 60.0),
        _ => (-60.0, 60.0),
    };
    quad::integrate(|x| (f.density_ac(x) - g.density_ac(x)).abs(), lo, hi, &breaks, 0.1)
}

/// Sup over `grid` of `|F_n − F|` for each `n` in `n_probe`.
///
/// Rows are `n, sup_gap, argmax, ac_l1`; `ac_l1` is reported only for limits
/// with a finite atom and an absolutely continuous part (NaN otherwise).
pub fn weak_convergence_check<S>(
    seq: S,
    limit: &LimitLaw,
    grid: &[f64],
    n_probe: &[u64],
) -> Result<ExperimentReport>
where
    S: Fn(u64) -> Result<MixtureDistribution> + Sync,
{
    for &x in grid {
        if let Some(&atom) = limit.dist.finite_atom_locations().iter().find(|&&a| (x - a).abs() < 1e-6) {
            return Err(ShrinkError::GridCollision { x, atom });
        }
        if !x.is_finite() {
            return Err(ShrinkError::NonFinite(format!("grid point {x}")));
        }
    }
    let with_tv = !limit.dist.pieces.is_empty() && !limit.dist.finite_atom_locations().is_empty();
    let rows = n_probe
        .par_iter()
        .map(|&n| {
            let fnd = seq(n)?;
            let (mut sup, mut arg) = (0.0f64, f64::NAN);
            for &x in grid {
                let d = (fnd.cdf(x) - limit.dist.cdf(x)).abs();
                if d > sup || arg.is_nan() {
                    sup = sup.max(d);
                    arg = x;
                }
            }
            let tv = if with_tv { ac_l1_distance(&fnd, &limit.dist) } else { f64::NAN };
            Ok(vec![n.into(), sup.into(), arg.into(), tv.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = ExperimentReport::new("weak_convergence", &["n", "sup_gap", "argmax", "ac_l1"]);
    rep.rows = rows;
    rep.meta = serde_json::json!({ "mode": limit.mode, "grid_points": grid.len() });
    Ok(rep)
}

/// `count` evenly spaced points on `[lo, hi]`, each moved to at least `margin`
/// away from the finite atoms of `limit`, plus the probes `atom ± margin`.
pub fn grid_avoiding_atoms(limit: &LimitLaw, lo: f64, hi: f64, count: usize, margin: f64) -> Vec<f64> {
    let atoms = limit.dist.finite_atom_locations();
    let mut out: Vec<f64> = (0..count)
        .map(|i| {
            let mut x = lo + (hi - lo) * i as f64 / (count.max(2) - 1) as f64;
            for &a in &atoms {
                if (x - a).abs() < margin {
                    x = if x >= a { a + margin } else { a - margin };
                }
            }
            x
        })
        .collect();
    for &a in &atoms {
        out.extend([a - margin, a + margin]);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// `√n(θ̂ − θ)`
    SqrtN,
    /// `(θ̂ − θ)/η`
    InvEta,
}

/// A finite-sample sequence `n ↦ F_n` together with the limit it should reach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: &'static str,
    pub kind: EstimatorKind,
    pub scaling: Scaling,
    pub path: TuningPath,
    pub rule: ThetaRule,
}

impl Scenario {
    pub fn law(&self, n: u64) -> Result<MixtureDistribution> {
        let tuning = self.path.plan(n)?;
        let point = ModelPoint::new(n, self.rule.theta(n, tuning.eta))?;
        match self.scaling {
            Scaling::SqrtN => finite_sample_dist(self.kind, &point, &tuning),
            Scaling::InvEta => rescaled_dist(self.kind, &point, &tuning),
        }
    }

    pub fn regime(&self) -> Result<RegimeSpec> {
        self.rule.regime(&self.path)
    }

    pub fn limit(&self) -> Result<LimitLaw> {
        let regime = self.regime()?;
        let a = self.path.scad_a;
        match (self.scaling, regime.e) {
            (Scaling::SqrtN, ExtReal::Finite(e)) => conservative_limit(self.kind, regime.nu, e, a),
            (Scaling::SqrtN, _) => consistent_limit(self.kind, &regime, a),
            (Scaling::InvEta, _) => rescaled_limit(self.kind, &regime, a),
        }
    }

    /// 50 points on `[−4, 4]` kept 0.05 away from limit atoms, or on `[−2, 2]`
    /// kept 0.15 away after rescaling.
    pub fn grid(&self, limit: &LimitLaw) -> Vec<f64> {
        let (h, margin) = match self.scaling {
            Scaling::SqrtN => (4.0, 0.05),
            Scaling::InvEta => (2.0, 0.15),
        };
        grid_avoiding_atoms(limit, -h, h, 50, margin)
    }

    pub fn check(&self, n_probe: &[u64]) -> Result<ExperimentReport> {
        let limit = self.limit()?;
        let mut rep = weak_convergence_check(|n| self.law(n), &limit, &self.grid(&limit), n_probe)?;
        rep.name = self.name.to_string();
        rep.meta = serde_json::json!({ "scenario": self, "mode": limit.mode });
        Ok(rep)
    }
}

/// Every case of the limit theorems, instantiated with `η_n = e/√n`
/// (conservative) or `η_n = n^{−1/4}` (consistent) and a small drift in `θ_n`.
pub fn canonical_scenarios(scad_a: f64) -> Result<Vec<Scenario>> {
    use EstimatorKind::*;
    use Scaling::*;
    let cons = |e: f64| TuningPath::with_a(e, 0.5, scad_a);
    let quarter = TuningPath::with_a(1.0, 0.25, scad_a)?;
    let d = 0.5;
    let s = |name, kind, scaling, path, rule: ThetaRule| Scenario {
        name,
        kind,
        scaling,
        path,
        rule: rule.with_drift(d),
    };
    Ok(vec![
        s("conservative-hard-local", Hard, SqrtN, cons(1.96)?, ThetaRule::local(1.0)),
        s("conservative-hard-fixed", Hard, SqrtN, cons(1.0)?, ThetaRule::Fixed { theta: 0.05 }),
        s("conservative-soft-local", Soft, SqrtN, cons(1.0)?, ThetaRule::local(-0.5)),
        s("conservative-soft-fixed", Soft, SqrtN, cons(1.0)?, ThetaRule::Fixed { theta: 0.05 }),
        s("conservative-scad-local", Scad, SqrtN, cons(1.0)?, ThetaRule::local(0.8)),
        s("conservative-scad-fixed", Scad, SqrtN, cons(1.0)?, ThetaRule::Fixed { theta: -0.05 }),
        s("consistent-hard-inside", Hard, SqrtN, quarter, ThetaRule::eta_multiple(0.5, 0.0)),
        s("consistent-hard-boundary", Hard, SqrtN, quarter, ThetaRule::boundary(1.0, 0.0)),
        s("consistent-hard-outside", Hard, SqrtN, quarter, ThetaRule::eta_multiple(-1.5, 0.0)),
        s("consistent-soft-local", Soft, SqrtN, quarter, ThetaRule::local(2.0)),
        s("consistent-soft-escape", Soft, SqrtN, quarter, ThetaRule::eta_multiple(0.5, 0.0)),
        s("consistent-scad-inside", Scad, SqrtN, quarter, ThetaRule::eta_multiple(3.0, 0.0)),
        s("consistent-scad-boundary", Scad, SqrtN, quarter, ThetaRule::boundary(scad_a, 1.0)),
        s("consistent-scad-outside", Scad, SqrtN, quarter, ThetaRule::eta_multiple(4.0, 0.0)),
        s("rescaled-hard-inside", Hard, InvEta, quarter, ThetaRule::eta_multiple(0.5, 0.0)),
        s("rescaled-hard-boundary", Hard, InvEta, quarter, ThetaRule::boundary(1.0, 0.0)),
        s("rescaled-hard-outside", Hard, InvEta, quarter, ThetaRule::eta_multiple(2.0, 0.0)),
        s("rescaled-soft-inside", Soft, InvEta, quarter, ThetaRule::eta_multiple(0.5, 0.0)),
        s("rescaled-soft-outside", Soft, InvEta, quarter, ThetaRule::eta_multiple(-5.0, 0.0)),
        s("rescaled-scad-soft-zone", Scad, InvEta, quarter, ThetaRule::eta_multiple(1.5, 0.0)),
        s("rescaled-scad-middle", Scad, InvEta, quarter, ThetaRule::eta_multiple(3.0, 0.0)),
        s("rescaled-scad-outside", Scad, InvEta, quarter, ThetaRule::eta_multiple(-4.0, 0.0)),
    ])
}
