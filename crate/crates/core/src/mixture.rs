//! Atoms plus piecewise scaled-Gaussian densities.
//!
//! Every finite-sample and limiting law in the crate is a [`MixtureDistribution`].
//! A [`GaussPiece`] carries the density `x ↦ c·φ(αx + β)` on `(lower, upper]`,
//! so its CDF contribution is a difference of two Φ values.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShrinkError};
use crate::ext_real::ExtReal;
use crate::normal::{interval_prob, pdf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussPiece {
    pub coeff: f64,
    pub slope: f64,
    pub shift: f64,
    pub lower: ExtReal,
    pub upper: ExtReal,
}

impl GaussPiece {
    pub fn new(coeff: f64, slope: f64, shift: f64, lower: ExtReal, upper: ExtReal) -> Result<Self> {
        if !(coeff.is_finite() && coeff >= 0.0) {
            return Err(ShrinkError::InvalidArgument(format!("piece coeff {coeff}")));
        }
        if !(slope.is_finite() && slope != 0.0) || !shift.is_finite() {
            return Err(ShrinkError::InvalidArgument(format!("piece slope {slope}, shift {shift}")));
        }
        if lower >= upper {
            return Err(ShrinkError::InvalidArgument(format!("empty piece ({lower}, {upper}]")));
        }
        Ok(GaussPiece { coeff, slope, shift, lower, upper })
    }

    /// Standard normal density restricted to `(lower, upper]`.
    pub fn normal(lower: ExtReal, upper: ExtReal) -> Result<Self> {
        Self::new(1.0, 1.0, 0.0, lower, upper)
    }

    #[inline]
    fn z(&self, x: f64) -> f64 {
        self.slope * x + self.shift
    }

    /// Sorted standardized endpoints of the piece restricted to `(lower, min(x, upper)]`.
    fn z_range(&self, x: f64) -> Option<(f64, f64)> {
        let lo = self.lower.to_f64();
        let hi = self.upper.to_f64().min(x);
        if hi <= lo {
            return None;
        }
        let (za, zb) = (self.z(lo), self.z(hi));
        Some(if za <= zb { (za, zb) } else { (zb, za) })
    }

    #[inline]
    fn scale(&self) -> f64 {
        self.coeff / self.slope.abs()
    }

    /// Mass on `(lower, min(x, upper)]`.
    pub fn mass_upto(&self, x: f64) -> f64 {
        match self.z_range(x) {
            Some((za, zb)) => self.scale() * interval_prob(za, zb),
            None => 0.0,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass_upto(f64::INFINITY)
    }

    /// Density on `(lower, upper]`, zero elsewhere.
    pub fn density(&self, x: f64) -> f64 {
        let xe = ExtReal::Finite(x);
        if self.lower < xe && xe <= self.upper {
            self.coeff * pdf(self.z(x))
        } else {
            0.0
        }
    }

    /// Density on `[lower, upper)`: the right-hand limit at a breakpoint.
    pub fn density_right(&self, x: f64) -> f64 {
        let xe = ExtReal::Finite(x);
        if self.lower <= xe && xe < self.upper {
            self.coeff * pdf(self.z(x))
        } else {
            0.0
        }
    }

    /// `(∫1, ∫x, ∫x²)` of the piece density, from truncated-normal moments.
    pub fn moments(&self) -> (f64, f64, f64) {
        let Some((za, zb)) = self.z_range(f64::INFINITY) else {
            return (0.0, 0.0, 0.0);
        };
        let m0 = interval_prob(za, zb);
        let m1 = pdf(za) - pdf(zb);
        let zpdf = |z: f64| if z.is_infinite() { 0.0 } else { z * pdf(z) };
        let m2 = m0 + zpdf(za) - zpdf(zb);
        let (a, b, s) = (self.slope, self.shift, self.scale());
        let e0 = s * m0;
        let e1 = s * (m1 - b * m0) / a;
        let e2 = s * (m2 - 2.0 * b * m1 + b * b * m0) / (a * a);
        (e0, e1, e2)
    }

    /// Law of `X + δ`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        let d = ExtReal::new(delta)?;
        Self::new(
            self.coeff,
            self.slope,
            self.shift - self.slope * delta,
            self.lower.checked_add(d)?,
            self.upper.checked_add(d)?,
        )
    }

    /// Law of `kX` for `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(
            self.coeff / k,
            self.slope / k,
            self.shift,
            self.lower.checked_scale(k)?,
            self.upper.checked_scale(k)?,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub loc: ExtReal,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MixtureDistribution {
    pub atoms: Vec<Atom>,
    pub pieces: Vec<GaussPiece>,
}

impl MixtureDistribution {
    pub fn new(atoms: Vec<Atom>, pieces: Vec<GaussPiece>) -> Result<Self> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.weight.is_finite() && a.weight >= 0.0) {
                return Err(ShrinkError::InvalidArgument(format!("atom weight {}", a.weight)));
            }
            if atoms[..i].iter().any(|b| b.loc == a.loc) {
                return Err(ShrinkError::InvalidArgument(format!("duplicate atom at {}", a.loc)));
            }
        }
        Ok(MixtureDistribution { atoms, pieces })
    }

    pub fn point_mass(loc: ExtReal) -> Self {
        MixtureDistribution { atoms: vec![Atom { loc, weight: 1.0 }], pieces: vec![] }
    }

    /// N(μ, 1).
    pub fn normal(mean: f64) -> Self {
        MixtureDistribution {
            atoms: vec![],
            pieces: vec![GaussPiece {
                coeff: 1.0,
                slope: 1.0,
                shift: -mean,
                lower: ExtReal::NegInf,
                upper: ExtReal::PosInf,
            }],
        }
    }

    /// Right-continuous CDF. Atoms at −∞ always count; atoms at +∞ never do.
    pub fn cdf(&self, x: f64) -> f64 {
        let xe = ExtReal::from(x);
        let a: f64 = self.atoms.iter().filter(|a| a.loc <= xe).map(|a| a.weight).sum();
        let p: f64 = self.pieces.iter().map(|p| p.mass_upto(x)).sum();
        a + p
    }

    /// Left limit `F(x⁻)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        let xe = ExtReal::from(x);
        let a: f64 = self.atoms.iter().filter(|a| a.loc < xe).map(|a| a.weight).sum();
        let p: f64 = self.pieces.iter().map(|p| p.mass_upto(x)).sum();
        a + p
    }

    /// Density of the absolutely continuous part, pieces read as `(lower, upper]`.
    pub fn density_ac(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.density(x)).sum()
    }

    /// Right-hand limit of the absolutely continuous density.
    pub fn density_ac_right(&self, x: f64) -> f64 {
        self.pieces.iter().map(|p| p.density_right(x)).sum()
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn piece_mass(&self) -> f64 {
        self.pieces.iter().map(|p| p.mass()).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.atom_mass() + self.piece_mass()
    }

    /// Mass sitting at ±∞.
    pub fn escaped_mass(&self) -> f64 {
        self.atoms.iter().filter(|a| a.loc.is_infinite()).map(|a| a.weight).sum()
    }

    /// Finite atom locations and finite piece endpoints, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .atoms
            .iter()
            .filter_map(|a| a.loc.finite())
            .chain(self.pieces.iter().flat_map(|p| [p.lower.finite(), p.upper.finite()]).flatten())
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }

    pub fn finite_atom_locations(&self) -> Vec<f64> {
        self.atoms.iter().filter_map(|a| a.loc.finite()).collect()
    }

    /// `E[X²]`; infinite when positive mass sits at ±∞.
    pub fn second_moment(&self) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| a.weight * a.loc.to_f64().powi(2))
            .sum();
        atoms + self.pieces.iter().map(|p| p.moments().2).sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|a| a.weight > 0.0)
            .map(|a| a.weight * a.loc.to_f64())
            .sum();
        atoms + self.pieces.iter().map(|p| p.moments().1).sum::<f64>()
    }

    /// Law of `X + δ` for finite `δ`.
    pub fn shifted(&self, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(ShrinkError::NonFinite(format!("shift {delta}")));
        }
        let d = ExtReal::Finite(delta);
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom { loc: a.loc.checked_add(d)?, weight: a.weight }))
            .collect::<Result<Vec<_>>>()?;
        let pieces = self.pieces.iter().map(|p| p.shifted(delta)).collect::<Result<Vec<_>>>()?;
        Ok(MixtureDistribution { atoms, pieces })
    }

    /// Law of `kX` for a finite `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(ShrinkError::InvalidArgument(format!("scale factor {k}")));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Ok(Atom { loc: a.loc.checked_scale(k)?, weight: a.weight }))
            .collect::<Result<Vec<_>>>()?;
        let pieces = self.pieces.iter().map(|p| p.scaled(k)).collect::<Result<Vec<_>>>()?;
        Ok(MixtureDistribution { atoms, pieces })
    }
}
