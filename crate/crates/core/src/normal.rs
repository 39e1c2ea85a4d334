//! Standard normal density, distribution function and quantiles.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Result, ShrinkError};
use crate::ext_real::ExtReal;

/// 1/√(2π)
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Tail probabilities below this are returned as zero.
pub const TAIL_FLOOR: f64 = 1e-300;

/// Standard normal density; rejects non-finite input.
pub fn phi(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(ShrinkError::NonFinite(format!("phi({x})")));
    }
    Ok(pdf(x))
}

/// Unchecked density. Infinite input gives 0.
#[inline]
pub fn pdf(x: f64) -> f64 {
    if x.is_infinite() {
        return 0.0;
    }
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Φ on the extended reals.
pub fn cdf_ext(x: ExtReal) -> f64 {
    match x {
        ExtReal::NegInf => 0.0,
        ExtReal::PosInf => 1.0,
        ExtReal::Finite(v) => cdf(v),
    }
}

/// Φ(x) through erfc, so both tails keep full relative accuracy.
/// IEEE infinities are accepted; NaN propagates.
#[inline]
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    if !(x > 0.0) {
        let p = 0.5 * libm::erfc(-x * FRAC_1_SQRT_2);
        if p < TAIL_FLOOR {
            0.0
        } else {
            p
        }
    } else {
        1.0 - upper(x)
    }
}

/// Upper tail 1 − Φ(x) without cancellation.
#[inline]
pub fn upper(x: f64) -> f64 {
    cdf(-x)
}

/// P(a < Z ≤ b) for a ≤ b, computed on whichever side avoids cancellation.
#[inline]
pub fn interval_prob(a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    if a > 0.0 {
        (upper(a) - upper(b)).max(0.0)
    } else if b < 0.0 {
        (cdf(b) - cdf(a)).max(0.0)
    } else {
        // straddles zero: both terms are ≤ ½ so no cancellation
        1.0 - cdf(a) - upper(b)
    }
}

/// Φ⁻¹ by bracketed bisection on [−40, 40] followed by one Newton step.
pub fn phi_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(ShrinkError::ProbabilityOutOfRange(p));
    }
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let d = pdf(x);
    if d > 0.0 {
        let step = (cdf(x) - p) / d;
        if step.is_finite() && step.abs() < (hi - lo).max(1e-300) * 4.0 {
            return Ok(x - step);
        }
    }
    Ok(x)
}

/// Fast normal quantile (Wichura's AS 241, about 1e-16 relative accuracy).
/// Used for drawing variates; `phi_inv` is the reference inverse.
pub fn quantile_fast(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
                + 6.726_577_092_700_87e4)
                * r
                + 4.592_195_393_154_987e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_3e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        let r = r - 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_7e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        let r = r - 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Total variation between N(θ₁, 1/n) and N(θ₂, 1/n), which equals the
/// distance between the full n-sample experiments since ȳ is sufficient.
pub fn gaussian_tv(n: u64, theta1: f64, theta2: f64) -> f64 {
    let d = (n as f64).sqrt() * (theta1 - theta2).abs();
    // 2Φ(d/2) − 1 written as erf to keep accuracy for small d
    libm::erf(d / (2.0 * SQRT_2)).clamp(0.0, 1.0)
}
