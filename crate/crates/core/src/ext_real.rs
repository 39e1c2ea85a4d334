//! Extended reals `ℝ ∪ {−∞, +∞}` with explicit infinite states.
//!
//! Limits such as `lim √n θ_n` or `lim θ_n / η_n` live here. Infinities are
//! enum variants rather than IEEE infinities so regime dispatch can match on
//! them exactly.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Neg;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Result, ShrinkError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps a float; IEEE infinities map to the infinite variants and NaN is rejected.
    pub fn new(x: f64) -> Result<Self> {
        if x.is_nan() {
            Err(ShrinkError::NonFinite("NaN is not an extended real".into()))
        } else if x == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if x == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(x))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            _ => None,
        }
    }

    /// IEEE view, used only inside closed-form evaluation.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// −1, 0 or 1, with `sign(0) = 0`.
    pub fn signum(self) -> f64 {
        match self {
            ExtReal::NegInf => -1.0,
            ExtReal::PosInf => 1.0,
            ExtReal::Finite(x) if x > 0.0 => 1.0,
            ExtReal::Finite(x) if x < 0.0 => -1.0,
            ExtReal::Finite(_) => 0.0,
        }
    }

    pub fn abs(self) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::Finite(x.abs()),
            _ => ExtReal::PosInf,
        }
    }

    /// Infinity carrying the sign of `s` (`s` must be nonzero).
    pub fn signed_infinity(s: f64) -> ExtReal {
        if s < 0.0 {
            ExtReal::NegInf
        } else {
            ExtReal::PosInf
        }
    }

    pub fn checked_add(self, rhs: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, rhs) {
            (Finite(a), Finite(b)) => ExtReal::new(a + b),
            (PosInf, NegInf) | (NegInf, PosInf) => {
                Err(ShrinkError::UndefinedArithmetic("∞ − ∞".into()))
            }
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }

    pub fn checked_sub(self, rhs: ExtReal) -> Result<ExtReal> {
        self.checked_add(-rhs)
    }

    /// Product with a finite scalar; `0 · ±∞` is rejected.
    pub fn checked_scale(self, k: f64) -> Result<ExtReal> {
        if !k.is_finite() {
            return Err(ShrinkError::NonFinite(format!("scale factor {k}")));
        }
        match self {
            ExtReal::Finite(x) => ExtReal::new(x * k),
            inf if k == 0.0 => Err(ShrinkError::UndefinedArithmetic(format!("0 · {inf}"))),
            inf => Ok(if k > 0.0 { inf } else { -inf }),
        }
    }

    /// `|self| == x`, exact.
    pub fn abs_eq(self, x: f64) -> bool {
        matches!(self, ExtReal::Finite(v) if v.abs() == x)
    }
}

impl Neg for ExtReal {
    type Output = ExtReal;
    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::Finite(-x),
            ExtReal::PosInf => ExtReal::NegInf,
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN; use [`ExtReal::new`] for untrusted input.
    fn from(x: f64) -> Self {
        ExtReal::new(x).expect("NaN passed to ExtReal::from")
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (NegInf, NegInf) | (PosInf, PosInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (_, NegInf) | (PosInf, _) => Ordering::Greater,
            // numeric order, so that -0.0 and 0.0 compare equal as PartialEq says
            (Finite(a), Finite(b)) => a.partial_cmp(b).unwrap_or_else(|| a.total_cmp(b)),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::PosInf => f.write_str("+inf"),
            ExtReal::Finite(x) => write!(f, "{x}"),
        }
    }
}

// JSON form: finite values are numbers, infinities the strings "-inf" / "+inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::Finite(x) => s.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;
        impl Visitor<'_> for ExtVisitor {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"-inf\", \"+inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                ExtReal::new(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(ExtVisitor)
    }
}

impl std::str::FromStr for ExtReal {
    type Err = ShrinkError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-inf" | "-∞" => Ok(ExtReal::NegInf),
            "+inf" | "inf" | "∞" | "+∞" => Ok(ExtReal::PosInf),
            other => other
                .parse::<f64>()
                .map_err(|_| ShrinkError::InvalidArgument(format!("not an extended real: {other:?}")))
                .and_then(ExtReal::new),
        }
    }
}
