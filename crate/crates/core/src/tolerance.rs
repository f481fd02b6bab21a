//! Numerical tolerances.
//!
//! The closed-form results are exact; the implementation is floating point.
//! Tolerances grow with composition depth: constructor identities are held to
//! `CONSTRUCTOR`, quantities derived from several products to `DERIVED`, and
//! comparisons against iterative search results to `OPTIMIZER`.

use serde::{Deserialize, Serialize};

/// Allowed deviation of `<psi,psi>` from one for a unit vector.
pub const UNIT_NORM: f64 = 1e-12;
/// Allowed entrywise deviation from Hermitian symmetry.
pub const HERMITIAN: f64 = 1e-12;
/// Eigenvalues closer than this (relative to the matrix norm) share an eigenspace.
pub const EIGEN_MERGE: f64 = 1e-9;
/// Smallest negative variance radicand tolerated before reporting corruption.
pub const RADICAND: f64 = 1e-12;
/// Identities that hold by construction.
pub const CONSTRUCTOR: f64 = 1e-12;
/// Equalities derived through several floating-point products.
pub const DERIVED: f64 = 1e-10;
/// Comparisons against derivative-free search results.
pub const OPTIMIZER: f64 = 1e-4;
/// Default slack for the saturation-condition checker. Near the ends of the
/// saturating range the discernability deficit is about twice the hull
/// violation, so this stays well below `DELTA_MATCH`.
pub const SATURATION: f64 = 1e-9;
/// Agreement with `tan(theta)` that counts as reaching the bound.
pub const DELTA_MATCH: f64 = 1e-8;
/// Uncertainty, relative to the gap between means, below which an outcome
/// distribution is treated as a point mass by the threshold rule.
pub const POINT_MASS: f64 = 1e-9;
/// Total uncertainty below which the optimizer scores a point as minus infinity.
pub const SEARCH_FLOOR: f64 = 1e-9;

/// Runtime-overridable tolerance set; defaults are the module constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub unit_norm: f64,
    pub hermitian: f64,
    pub eigen_merge: f64,
    pub saturation: f64,
    pub qmie: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit_norm: UNIT_NORM,
            hermitian: HERMITIAN,
            eigen_merge: EIGEN_MERGE,
            saturation: SATURATION,
            qmie: DERIVED,
        }
    }
}
