//! Seeded simulation of the location experiment, empirical CDFs, KS distances
//! and the uniform-rate experiments.
//!
//! Each batch of draws comes from its own ChaCha8 stream keyed by
//! `(seed, batch index)`, so output does not depend on how batches are scheduled.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};
use crate::estimators::{estimate, EstimatorKind, TuningPlan};
use crate::finite_dist::{finite_sample_dist, ModelPoint};
use crate::mixture::MixtureDistribution;
use crate::normal::{cdf, quantile_fast};
use crate::report::ExperimentReport;
use crate::selection::TuningPath;

/// Draws per independent substream.
pub const BATCH: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    pub replications: usize,
    pub point: ModelPoint,
    pub tuning: TuningPlan,
}

/// Uniform on (0, 1) from the top 52 bits, never 0 or 1.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal variates from substream `stream` of `seed`.
pub fn normal_stream(seed: u64, stream: u64, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..len).map(|_| quantile_fast(open_unit(rng.next_u64()))).collect()
}

/// `count` draws of ȳ ~ N(θ, 1/n), in stream order.
pub fn simulate_ybar(seed: u64, count: usize, point: &ModelPoint) -> Vec<f64> {
    let s = point.sqrt_n();
    let batches = count.div_ceil(BATCH);
    (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let len = BATCH.min(count - b * BATCH);
            normal_stream(seed, b as u64, len).into_iter().map(move |z| point.theta + z / s)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalCdf {
    values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(ShrinkError::InvalidArgument("empirical CDF needs at least one value".into()));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(ShrinkError::NonFinite("NaN sample value".into()));
        }
        values.par_sort_unstable_by(f64::total_cmp);
        Ok(EmpiricalCdf { values })
    }

    pub fn count(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Fraction of values `≤ x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.count() as f64
    }

    /// Fraction of values `< x`.
    pub fn eval_left(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v < x) as f64 / self.count() as f64
    }

    /// Fraction of values exactly equal to `x`.
    pub fn fraction_at(&self, x: f64) -> f64 {
        self.eval(x) - self.eval_left(x)
    }

    /// Smallest sample value `v` with `eval(v) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let k = ((p * self.count() as f64).ceil() as usize).clamp(1, self.count());
        self.values[k - 1]
    }

    /// Quantiles at `0.01, 0.02, …, 0.99`.
    pub fn quantile_report(&self, meta: serde_json::Value) -> ExperimentReport {
        let mut rep = ExperimentReport::new("quantiles", &["p", "quantile"]);
        for i in 1..100 {
            let p = i as f64 / 100.0;
            rep.push(vec![p.into(), self.quantile(p).into()]);
        }
        rep.meta = meta;
        rep
    }
}

/// Empirical law of `√n(θ̂ − θ)` over `cfg.replications` draws.
pub fn simulate_estimates(kind: EstimatorKind, cfg: &SimConfig) -> Result<EmpiricalCdf> {
    if cfg.replications == 0 {
        return Err(ShrinkError::InvalidArgument("replications >= 1 violated".into()));
    }
    let s = cfg.point.sqrt_n();
    let th = cfg.point.theta;
    let vals = simulate_ybar(cfg.seed, cfg.replications, &cfg.point)
        .into_par_iter()
        .map(|y| s * (estimate(kind, y, &cfg.tuning) - th))
        .collect();
    EmpiricalCdf::new(vals)
}

/// `sup_x |F_emp(x) − F(x)|`, comparing both one-sided values at every sample point.
pub fn ks_distance(emp: &EmpiricalCdf, dist: &MixtureDistribution) -> f64 {
    let v = emp.values();
    let n = v.len() as f64;
    // indices where a new distinct value starts
    let starts: Vec<usize> = (0..v.len()).filter(|&i| i == 0 || v[i] != v[i - 1]).collect();
    starts
        .par_iter()
        .enumerate()
        .map(|(j, &i)| {
            let below = i as f64 / n;
            let next = starts.get(j + 1).copied().unwrap_or(v.len());
            let at = next as f64 / n;
            let x = v[i];
            (below - dist.cdf_left(x)).abs().max((at - dist.cdf(x)).abs())
        })
        .reduce(|| 0.0, f64::max)
}

/// `2Φ(−M/2) + Φ(−M/2 + 1)`.
pub fn uniform_rate_bound(m: f64) -> f64 {
    2.0 * cdf(-m / 2.0) + cdf(-m / 2.0 + 1.0)
}

/// `P(|√n(θ̂ − θ)| > c) = F(−c⁻) + 1 − F(c)`.
pub fn tail_probability(dist: &MixtureDistribution, c: f64) -> f64 {
    (dist.cdf_left(-c) + (1.0 - dist.cdf(c))).clamp(0.0, 1.0)
}

/// θ-grid for the uniform-rate sup: `points` values spread over `±2M/a_n`
/// plus `±η`, `±η(1 ± 0.01)` and `±M/(2a_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaGridRule {
    pub points: usize,
}

impl Default for ThetaGridRule {
    fn default() -> Self {
        ThetaGridRule { points: 401 }
    }
}

impl ThetaGridRule {
    pub fn grid(&self, eta: f64, a_n: f64, m: f64) -> Vec<f64> {
        let k = 2.0 * m / a_n;
        let p = self.points.max(2);
        let mut g: Vec<f64> = (0..p).map(|i| -k + 2.0 * k * i as f64 / (p - 1) as f64).collect();
        for base in [eta, 0.99 * eta, 1.01 * eta, m / (2.0 * a_n)] {
            g.extend([base, -base]);
        }
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }
}

/// Rows `n, eta, a_n, sup_prob, argsup_theta, bound` with
/// `a_n = min(√n, 1/η_n)` and the sup taken over the θ-grid.
pub fn uniform_rate_experiment(
    kind: EstimatorKind,
    path: &TuningPath,
    m: f64,
    n_list: &[u64],
    theta_grid: &ThetaGridRule,
) -> Result<ExperimentReport> {
    if !(m > 2.0) {
        return Err(ShrinkError::InvalidArgument(format!("M > 2 violated (M = {m})")));
    }
    let bound = uniform_rate_bound(m);
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let tuning = path.plan(n)?;
            let s = (n as f64).sqrt();
            let a_n = s.min(1.0 / tuning.eta);
            let c = m * s / a_n;
            let (mut sup, mut arg) = (f64::NEG_INFINITY, f64::NAN);
            for th in theta_grid.grid(tuning.eta, a_n, m) {
                let d = finite_sample_dist(kind, &ModelPoint::new(n, th)?, &tuning)?;
                let p = tail_probability(&d, c);
                if p > sup {
                    sup = p;
                    arg = th;
                }
            }
            Ok(vec![n.into(), tuning.eta.into(), a_n.into(), sup.into(), arg.into(), bound.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = ExperimentReport::new("uniform_rate", &["n", "eta", "a_n", "sup_prob", "argsup_theta", "bound"]);
    rep.rows = rows;
    rep.meta = serde_json::json!({ "kind": kind, "path": path, "M": m, "theta_grid": theta_grid });
    Ok(rep)
}

/// `P(√n|θ̂ − θ_n| > M)` along `θ_n = η_n/2`: rows `n, theta, eta, prob`.
pub fn rate_sharpness(kind: EstimatorKind, path: &TuningPath, m: f64, n_list: &[u64]) -> Result<ExperimentReport> {
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let tuning = path.plan(n)?;
            let th = tuning.eta / 2.0;
            let d = finite_sample_dist(kind, &ModelPoint::new(n, th)?, &tuning)?;
            Ok(vec![n.into(), th.into(), tuning.eta.into(), tail_probability(&d, m).into()])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rep = ExperimentReport::new("rate_sharpness", &["n", "theta", "eta", "prob"]);
    rep.rows = rows;
    rep.meta = serde_json::json!({ "kind": kind, "path": path, "M": m });
    Ok(rep)
}
