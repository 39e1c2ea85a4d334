//! Two-point lower bounds for estimating `F_{n,θ}(t)`, and the worst-case error
//! of concrete CDF estimators over the neighbourhood `|θ| < c/√n`.
//!
//! The pair `θ(±δ) = −(t ± δ)/√n` puts the atom just above and just below `t`:
//! the estimands differ by about the atom weight while the two experiments
//! are only `2Φ(δ) − 1` apart in total variation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};
use crate::estimators::{estimate, EstimatorKind, TuningPlan};
use crate::ext_real::ExtReal;
use crate::finite_dist::{finite_sample_dist, law_from_scaled, ModelPoint};
use crate::limits::{conservative_limit, consistent_limit};
use crate::montecarlo::normal_stream;
use crate::normal::{gaussian_tv, interval_prob, quantile_fast};
use crate::report::ExperimentReport;
use crate::selection::{RegimeSpec, TuningPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointProblem {
    pub n: u64,
    pub t: f64,
    pub delta: f64,
    /// Radius of the neighbourhood `|θ| < c/√n`.
    pub c: f64,
    pub tuning: TuningPlan,
    pub kind: EstimatorKind,
}

impl TwoPointProblem {
    pub fn new(kind: EstimatorKind, n: u64, t: f64, delta: f64, c: f64, tuning: TuningPlan) -> Result<Self> {
        if n == 0 || !t.is_finite() {
            return Err(ShrinkError::InvalidArgument(format!("n = {n}, t = {t}")));
        }
        if !(delta > 0.0 && delta < c - t.abs()) {
            return Err(ShrinkError::InvalidArgument(format!(
                "0 < delta < c - |t| violated (delta = {delta}, c = {c}, t = {t})"
            )));
        }
        Ok(TwoPointProblem { n, t, delta, c, tuning, kind })
    }

    /// `θ(d) = −(t + d)/√n`.
    pub fn theta(&self, d: f64) -> f64 {
        -(self.t + d) / (self.n as f64).sqrt()
    }

    pub fn e(&self) -> f64 {
        (self.n as f64).sqrt() * self.tuning.eta
    }

    fn with_delta(&self, delta: f64) -> Self {
        TwoPointProblem { delta, ..*self }
    }

    fn estimand(&self, theta: f64) -> Result<f64> {
        Ok(finite_sample_dist(self.kind, &ModelPoint::new(self.n, theta)?, &self.tuning)?.cdf(self.t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimandGap {
    pub gap: f64,
    pub leading_term: f64,
    pub remainder: f64,
}

/// `F_{n,θ(−δ)}(t) − F_{n,θ(δ)}(t)` split into `Φ(t − δ + E) − Φ(t − δ − E)` and a remainder.
pub fn estimand_gap(problem: &TwoPointProblem) -> Result<EstimandGap> {
    let d = problem.delta;
    let gap = problem.estimand(problem.theta(-d))? - problem.estimand(problem.theta(d))?;
    let e = problem.e();
    let leading_term = interval_prob(problem.t - d - e, problem.t - d + e);
    Ok(EstimandGap { gap, leading_term, remainder: gap - leading_term })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// `(Φ(t + E) − Φ(t − E))/2`.
    pub epsilon_range: f64,
    /// Error level the bound was certified for.
    pub epsilon: f64,
    /// `sup_δ ½(1 − TV)` over the sweep, restricted to `ε < |gap(δ)|/2`.
    pub bound: f64,
    /// δ attaining the bound (NaN when no δ qualified).
    pub delta: f64,
}

/// Number of decades in the δ sweep `δ₀, δ₀/10, …`.
pub const DELTA_DECADES: i32 = 8;

/// Two-point bound at `ε = 0.9·epsilon_range`.
pub fn minimax_lower_bound(problem: &TwoPointProblem) -> Result<LowerBound> {
    let e = problem.e();
    let range = interval_prob(problem.t - e, problem.t + e) / 2.0;
    minimax_lower_bound_at(problem, 0.9 * range)
}

/// Two-point bound for a given ε, sweeping `δ = δ₀·10^{−k}`.
pub fn minimax_lower_bound_at(problem: &TwoPointProblem, epsilon: f64) -> Result<LowerBound> {
    let e = problem.e();
    let epsilon_range = interval_prob(problem.t - e, problem.t + e) / 2.0;
    let (mut bound, mut best) = (0.0, f64::NAN);
    for k in 0..=DELTA_DECADES {
        let d = problem.delta * 10f64.powi(-k);
        let gap = estimand_gap(&problem.with_delta(d))?.gap;
        if epsilon < gap.abs() / 2.0 {
            let b = 0.5 * (1.0 - gaussian_tv(problem.n, problem.theta(d), problem.theta(-d)));
            if b > bound {
                bound = b;
                best = d;
            }
        }
    }
    Ok(LowerBound { epsilon_range, epsilon, bound, delta: best })
}

/// Bound for `G_{n,θ}(t) = F_{n,θ}(√nη·t)` over `|θ| < cη`, via `s = √nη·t`.
pub fn rescaled_lower_bound(kind: EstimatorKind, n: u64, t: f64, c: f64, tuning: TuningPlan) -> Result<LowerBound> {
    let e = (n as f64).sqrt() * tuning.eta;
    let s = e * t;
    let ce = c * e;
    let p = TwoPointProblem::new(kind, n, s, 0.5 * (ce - s.abs()), ce, tuning)?;
    let mut lb = minimax_lower_bound(&p)?;
    lb.epsilon_range = interval_prob(e * (t - 1.0), e * (t + 1.0)) / 2.0;
    Ok(lb)
}

/// Sub-sample size rule for the m-out-of-n bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum MRule {
    /// `m = ⌈√n⌉`
    Sqrt,
    /// `m = ⌈n^p⌉`
    Power { p: f64 },
    /// `m = n`, the ordinary parametric bootstrap.
    Full,
}

impl MRule {
    pub fn m(&self, n: u64) -> u64 {
        let m = match *self {
            MRule::Sqrt => (n as f64).sqrt().ceil(),
            MRule::Power { p } => (n as f64).powf(p).ceil(),
            MRule::Full => n as f64,
        };
        (m as u64).clamp(1, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum CdfEstimatorSpec {
    /// Test `θ = 0` by `|ȳ| > n^{−γ}` and plug the outcome into the matching
    /// fixed-parameter limit law (with `e` replaced by `√nη`).
    PretestPlugin { gamma: f64 },
    /// Law of `√m(θ̂*_m − θ̂_n)` with `ȳ* ~ N(ȳ, 1/m)` and threshold `η_m`.
    /// `resamples = 0` uses the exact bootstrap law; otherwise that many draws.
    MOutOfNBootstrap {
        m: MRule,
        #[serde(default)]
        resamples: usize,
    },
    /// `F_{n,ȳ}(t)`: the finite-sample law evaluated at `θ = ȳ`.
    PlugIn,
    /// Returns the true `F_{n,θ}(t)`; checks the harness.
    OracleCheat,
}

impl Default for CdfEstimatorSpec {
    fn default() -> Self {
        CdfEstimatorSpec::PretestPlugin { gamma: 0.25 }
    }
}

impl CdfEstimatorSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CdfEstimatorSpec::PretestPlugin { .. } => "pretest_plugin",
            CdfEstimatorSpec::MOutOfNBootstrap { .. } => "m_out_of_n_bootstrap",
            CdfEstimatorSpec::PlugIn => "plug_in",
            CdfEstimatorSpec::OracleCheat => "oracle_cheat",
        }
    }
}

/// Everything an estimator may look at besides the data.
#[derive(Debug, Clone, Copy)]
pub struct EstimationContext<'a> {
    pub kind: EstimatorKind,
    pub n: u64,
    pub t: f64,
    pub path: &'a TuningPath,
}

/// `F̂_n(t)` computed from the sample mean `ybar`. `theta` is used only by
/// [`CdfEstimatorSpec::OracleCheat`]; `rng` only by resampling bootstraps.
pub fn estimate_cdf<R: Rng>(
    spec: &CdfEstimatorSpec,
    ctx: &EstimationContext<'_>,
    ybar: f64,
    theta: f64,
    rng: &mut R,
) -> Result<f64> {
    let n = ctx.n;
    let s = (n as f64).sqrt();
    let tuning = ctx.path.plan(n)?;
    let a = tuning.scad_a;
    match *spec {
        CdfEstimatorSpec::OracleCheat => {
            Ok(finite_sample_dist(ctx.kind, &ModelPoint::new(n, theta)?, &tuning)?.cdf(ctx.t))
        }
        CdfEstimatorSpec::PlugIn => {
            Ok(finite_sample_dist(ctx.kind, &ModelPoint::new(n, ybar)?, &tuning)?.cdf(ctx.t))
        }
        CdfEstimatorSpec::PretestPlugin { gamma } => {
            let reject = ybar.abs() > (n as f64).powf(-gamma);
            let law = if ctx.path.is_consistent() {
                let regime = if reject {
                    let inf = ExtReal::signed_infinity(ybar);
                    RegimeSpec::consistent(inf, inf, None)?
                } else {
                    RegimeSpec::consistent(ExtReal::ZERO, ExtReal::ZERO, None)?
                };
                consistent_limit(ctx.kind, &regime, a)?
            } else {
                let nu = if reject { ExtReal::signed_infinity(ybar) } else { ExtReal::ZERO };
                conservative_limit(ctx.kind, nu, s * tuning.eta, a)?
            };
            Ok(law.dist.cdf(ctx.t))
        }
        CdfEstimatorSpec::MOutOfNBootstrap { m, resamples } => {
            let m = m.m(n);
            let sm = (m as f64).sqrt();
            let tm = ctx.path.plan(m)?;
            let centre = estimate(ctx.kind, ybar, &tuning);
            if resamples == 0 {
                // √m(θ̂* − θ̂_n) = √m(θ̂* − ȳ) + √m(ȳ − θ̂_n), and √m(θ̂* − ȳ) has law F_{m,ȳ}
                let law = law_from_scaled(ctx.kind, sm * ybar, sm * tm.eta, a)?;
                Ok(law.cdf(ctx.t - sm * (ybar - centre)))
            } else {
                let hits = (0..resamples)
                    .filter(|_| {
                        let u = crate::montecarlo::open_unit(rng.next_u64());
                        let yb = ybar + quantile_fast(u) / sm;
                        sm * (estimate(ctx.kind, yb, &tm) - centre) <= ctx.t
                    })
                    .count();
                Ok(hits as f64 / resamples as f64)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseSummary {
    pub epsilon: f64,
    pub bound: f64,
    pub sup: f64,
    pub witness_theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub report: ExperimentReport,
    pub summary: WorstCaseSummary,
}

/// The θ-grid for the worst-case search: `size` interior points of
/// `(−c/√n, c/√n)` plus `θ(±δ)` for `δ ∈ {0.5, 0.1, 0.02}·(c − |t|)`.
pub fn worst_case_grid(n: u64, t: f64, c: f64, size: usize) -> Vec<f64> {
    let s = (n as f64).sqrt();
    let h = c / s;
    let mut g: Vec<f64> = (0..size).map(|i| -h + 2.0 * h * (i as f64 + 0.5) / size as f64).collect();
    for f in [0.5, 0.1, 0.02] {
        let d = f * (c - t.abs());
        g.extend([-(t + d) / s, -(t - d) / s]);
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Monte Carlo estimate of `P_{n,θ}(|F̂_n(t) − F_{n,θ}(t)| > ε)` on the
/// worst-case grid, with `ε = 0.9·(Φ(t + E) − Φ(t − E))/2`.
///
/// θ-point `i` draws from substream `i` of `seed`, so runs at different `n`
/// share random numbers.
#[allow(clippy::too_many_arguments)]
pub fn estimator_worst_case(
    spec: &CdfEstimatorSpec,
    kind: EstimatorKind,
    n: u64,
    t: f64,
    path: &TuningPath,
    c: f64,
    theta_grid_size: usize,
    seed: u64,
    replications: usize,
) -> Result<WorstCase> {
    if !(c > t.abs()) {
        return Err(ShrinkError::InvalidArgument(format!("c > |t| violated (c = {c}, t = {t})")));
    }
    if replications == 0 {
        return Err(ShrinkError::InvalidArgument("replications >= 1 violated".into()));
    }
    let tuning = path.plan(n)?;
    let problem = TwoPointProblem::new(kind, n, t, 0.5 * (c - t.abs()), c, tuning)?;
    let lb = minimax_lower_bound(&problem)?;
    let eps = lb.epsilon;
    let ctx = EstimationContext { kind, n, t, path };
    let s = (n as f64).sqrt();
    let grid = worst_case_grid(n, t, c, theta_grid_size);
    let probs = grid
        .par_iter()
        .enumerate()
        .map(|(i, &theta)| {
            let truth = finite_sample_dist(kind, &ModelPoint::new(n, theta)?, &tuning)?.cdf(t);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            rng.set_stream(i as u64);
            let mut bad = 0usize;
            for z in normal_stream(seed, i as u64, replications) {
                let f = estimate_cdf(spec, &ctx, theta + z / s, theta, &mut rng)?;
                if (f - truth).abs() > eps {
                    bad += 1;
                }
            }
            Ok(bad as f64 / replications as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut rep = ExperimentReport::new("impossibility", &["theta", "err_prob"]);
    let (mut sup, mut witness) = (f64::NEG_INFINITY, f64::NAN);
    for (&th, &p) in grid.iter().zip(&probs) {
        rep.push(vec![th.into(), p.into()]);
        if p > sup {
            sup = p;
            witness = th;
        }
    }
    let summary = WorstCaseSummary { epsilon: eps, bound: lb.bound, sup, witness_theta: witness };
    rep.meta = serde_json::json!({
        "estimator": spec, "kind": kind, "n": n, "t": t, "c": c, "path": path,
        "seed": seed, "replications": replications,
    });
    Ok(WorstCase { report: rep, summary })
}
