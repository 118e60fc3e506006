//! Monotone densities on `[0, ∞)` that the ziggurat construction can layer.
//!
//! Densities are unnormalized with peak `P(0) = 1`; `total_mass` carries the
//! normalization so the layer area is `total_mass / i_max`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A strictly decreasing density on `[0, ∞)` with `P(0) = 1`.
pub trait Density {
    fn density(&self, x: f64) -> f64;

    /// `∫_x^∞ P(t) dt`.
    fn cdf_complement(&self, x: f64) -> f64;

    fn total_mass(&self) -> f64;

    /// True when every chord of `P` lies on or above the curve, which is what
    /// the triangle split of the overhang boxes needs.
    fn globally_convex(&self) -> bool {
        false
    }
}

/// The two densities the samplers are built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityKind {
    /// `P(x) = e^{-x}`, total mass 1.
    Exponential,
    /// `P(x) = e^{-x²/2}`, total mass `√(π/2)`.
    HalfNormal,
}

impl DensityKind {
    pub fn name(self) -> &'static str {
        match self {
            DensityKind::Exponential => "exponential",
            DensityKind::HalfNormal => "half_normal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "exponential" => Some(DensityKind::Exponential),
            "half_normal" => Some(DensityKind::HalfNormal),
            _ => None,
        }
    }

    /// `P⁻¹(y)` for `y ∈ (0, 1]`.
    pub fn inverse_density(self, y: f64) -> f64 {
        match self {
            DensityKind::Exponential => -y.ln(),
            DensityKind::HalfNormal => (-2.0 * y.ln()).sqrt(),
        }
    }
}

impl fmt::Display for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Density for DensityKind {
    #[inline]
    fn density(&self, x: f64) -> f64 {
        match self {
            DensityKind::Exponential => (-x).exp(),
            DensityKind::HalfNormal => (-0.5 * x * x).exp(),
        }
    }

    fn cdf_complement(&self, x: f64) -> f64 {
        match self {
            DensityKind::Exponential => (-x).exp(),
            DensityKind::HalfNormal => (PI / 2.0).sqrt() * libm::erfc(x * FRAC_1_SQRT_2),
        }
    }

    fn total_mass(&self) -> f64 {
        match self {
            DensityKind::Exponential => 1.0,
            DensityKind::HalfNormal => (PI / 2.0).sqrt(),
        }
    }

    fn globally_convex(&self) -> bool {
        matches!(self, DensityKind::Exponential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peaks_at_one() {
        for kind in [DensityKind::Exponential, DensityKind::HalfNormal] {
            assert_eq!(kind.density(0.0), 1.0);
            assert!((kind.cdf_complement(0.0) - kind.total_mass()).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_round_trips() {
        for kind in [DensityKind::Exponential, DensityKind::HalfNormal] {
            for &x in &[0.1, 0.5, 1.0, 2.5, 7.0] {
                let back = kind.inverse_density(kind.density(x));
                assert!((back - x).abs() < 1e-12 * x.max(1.0), "{kind} {x} {back}");
            }
        }
    }

    #[test]
    fn names() {
        for kind in [DensityKind::Exponential, DensityKind::HalfNormal] {
            assert_eq!(DensityKind::from_name(kind.name()), Some(kind));
        }
        assert_eq!(DensityKind::from_name("gamma"), None);
    }
}
