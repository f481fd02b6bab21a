//! Closed-form discrimination quantities for a pair of pure states.
//!
//! The discernability of an observable `A` is
//! `|<A>_w - <A>_v| / (Δ_v A + Δ_w A)` and never exceeds `tan(theta)`. The
//! operators that reach `tan(theta)` are, up to scale and shift, the
//! one-parameter family `cos(α)(E11 - E22) + sin(α)(E12 + E21)` written in the
//! symmetric/antisymmetric basis of the pair, with `α ∈ [θ, π - θ]`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, inner, moments, ComplexVector, HermitianOperator, StatePair};
use crate::tolerance;

/// Value of the discernability, which may be infinite or undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Discernability {
    Defined(f64),
    /// Zero total uncertainty with distinct means; only possible for orthogonal states.
    Infinite,
    /// Both states are eigenvectors of `A` for a common eigenvalue.
    Undefined,
}

impl Discernability {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Discernability::Defined(d) => Some(d),
            Discernability::Infinite => Some(f64::INFINITY),
            Discernability::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscriminationStats {
    pub mean_v: f64,
    pub mean_w: f64,
    pub sigma_v: f64,
    pub sigma_w: f64,
    pub delta: Discernability,
}

/// Means, uncertainties and discernability of `A` in the two states of `pair`.
pub fn discernability(a: &HermitianOperator, pair: &StatePair) -> Result<DiscriminationStats> {
    let stats = stats_for(a, pair.v(), pair.w())?;
    if stats.delta == Discernability::Infinite && !pair.is_orthogonal() {
        return Err(Error::InvariantViolation(
            "zero total uncertainty with distinct means for non-orthogonal states".into(),
        ));
    }
    Ok(stats)
}

pub(crate) fn stats_for(
    a: &HermitianOperator,
    v: &ComplexVector,
    w: &ComplexVector,
) -> Result<DiscriminationStats> {
    let (mean_v, sigma_v) = moments(a, v)?;
    let (mean_w, sigma_w) = moments(a, w)?;
    let total = sigma_v + sigma_w;
    let diff = (mean_w - mean_v).abs();
    let delta = if total > tolerance::CONSTRUCTOR {
        Discernability::Defined(diff / total)
    } else if diff <= tolerance::DERIVED * mean_v.abs().max(mean_w.abs()).max(1.0) {
        Discernability::Undefined
    } else {
        Discernability::Infinite
    };
    Ok(DiscriminationStats { mean_v, mean_w, sigma_v, sigma_w, delta })
}

/// Upper bound `tan(theta)` on the discernability of any observable.
pub fn fleming_bound(pair: &StatePair) -> Result<f64> {
    if pair.is_orthogonal() {
        return Err(Error::BoundInfinite);
    }
    Ok(pair.theta().tan())
}

/// Slack `(Δ_v A + Δ_w A) sqrt(1 - |<w,v>|^2) - |<A>_w - <A>_v| |<w,v>|` of the
/// master inequality for arbitrary unit vectors. Non-negative for every `A`.
pub fn qmie_gap(a: &HermitianOperator, v: &ComplexVector, w: &ComplexVector) -> Result<f64> {
    let (mean_v, sigma_v) = moments(a, v)?;
    let (mean_w, sigma_w) = moments(a, w)?;
    let overlap = inner(w, v)?.norm().min(1.0);
    let sine = (1.0 - overlap * overlap).max(0.0).sqrt();
    Ok((sigma_v + sigma_w) * sine - (mean_w - mean_v).abs() * overlap)
}

/// [`qmie_gap`] for a pair, failing loudly if the inequality appears violated.
pub fn check_qmie(a: &HermitianOperator, pair: &StatePair) -> Result<f64> {
    check_qmie_within(a, pair, tolerance::DERIVED)
}

pub fn check_qmie_within(a: &HermitianOperator, pair: &StatePair, tol: f64) -> Result<f64> {
    let gap = qmie_gap(a, pair.v(), pair.w())?;
    let scale = a.frobenius_norm().max(1.0);
    if gap < -tol * scale {
        return Err(Error::InvariantViolation(format!("QMIE gap {gap:e} below -{tol:e}")));
    }
    Ok(gap)
}

/// Orthonormal basis `e1 = (v + w) / 2cos(θ/2)`, `e2 = (w - v) / 2sin(θ/2)` of span{v, w}.
pub fn build_onb(pair: &StatePair) -> (ComplexVector, ComplexVector) {
    let half = pair.theta() / 2.0;
    let one = Complex64::new(1.0, 0.0);
    let e1 = pair
        .v()
        .combine(one, pair.w(), one)
        .expect("pair vectors share a dimension")
        .scaled(Complex64::new(1.0 / (2.0 * half.cos()), 0.0));
    let e2 = pair
        .w()
        .combine(one, pair.v(), -one)
        .expect("pair vectors share a dimension")
        .scaled(Complex64::new(1.0 / (2.0 * half.sin()), 0.0));
    (e1, e2)
}

/// `|a><b|` as a dense matrix.
fn outer(a: &ComplexVector, b: &ComplexVector) -> DMatrix<Complex64> {
    a.as_dvector() * b.as_dvector().adjoint()
}

/// One member of the family of operators that saturate the bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturatingFamilySpec {
    pub alpha: f64,
    pub lambda_scale: f64,
    pub mu_shift: f64,
    pub basis: (ComplexVector, ComplexVector),
}

impl SaturatingFamilySpec {
    pub fn new(pair: &StatePair, alpha: f64, lambda_scale: f64, mu_shift: f64) -> Result<Self> {
        let (lower, upper) = saturating_range(pair);
        let slack = tolerance::CONSTRUCTOR;
        if !(alpha >= lower - slack && alpha <= upper + slack) {
            return Err(Error::OutsideSaturatingRange { alpha, lower, upper });
        }
        if lambda_scale == 0.0 || !lambda_scale.is_finite() {
            return Err(Error::InvalidArgument("lambda_scale must be finite and nonzero".into()));
        }
        if !mu_shift.is_finite() {
            return Err(Error::InvalidArgument("mu_shift must be finite".into()));
        }
        Ok(Self { alpha, lambda_scale, mu_shift, basis: build_onb(pair) })
    }

    /// `λ A0 + μ Id`, with `A0` acting as zero on the complement of span{v, w}.
    pub fn operator(&self) -> HermitianOperator {
        let a0 = family_matrix(&self.basis.0, &self.basis.1, self.alpha);
        HermitianOperator::from_hermitian_unchecked(a0).scale_shift(self.lambda_scale, self.mu_shift)
    }
}

fn family_matrix(e1: &ComplexVector, e2: &ComplexVector, alpha: f64) -> DMatrix<Complex64> {
    let (s, c) = alpha.sin_cos();
    let diag = outer(e1, e1) - outer(e2, e2);
    let off = outer(e1, e2) + outer(e2, e1);
    let m = diag * Complex64::new(c, 0.0) + off * Complex64::new(s, 0.0);
    let adj = m.adjoint();
    (m + adj).unscale(2.0)
}

/// The closed interval `[θ, π - θ]` of saturating angles.
pub fn saturating_range(pair: &StatePair) -> (f64, f64) {
    (pair.theta(), PI - pair.theta())
}

/// `cos(α)(E11 - E22) + sin(α)(E12 + E21)` for any `α`, without a range check.
///
/// Inside `[θ, π - θ]` this is a saturating observable; outside it the
/// discernability drops below `tan(θ)`.
pub fn rotated_observable(pair: &StatePair, alpha: f64) -> HermitianOperator {
    let (e1, e2) = build_onb(pair);
    HermitianOperator::from_hermitian_unchecked(family_matrix(&e1, &e2, alpha))
}

/// Saturating observable `λ A0(α) + μ Id` for `α ∈ [θ, π - θ]`.
pub fn saturating_observable(
    pair: &StatePair,
    alpha: f64,
    lambda_scale: f64,
    mu_shift: f64,
) -> Result<HermitianOperator> {
    Ok(SaturatingFamilySpec::new(pair, alpha, lambda_scale, mu_shift)?.operator())
}

/// `(ρ_w - ρ_v) / sin θ`, the family member at `α = π/2`.
pub fn simple_optimal(pair: &StatePair) -> HermitianOperator {
    let diff = pair.rho_w().sub(&pair.rho_v()).expect("pair vectors share a dimension");
    diff.scale_shift(1.0 / pair.theta().sin(), 0.0)
}

/// Diagnostic report on the saturation conditions.
///
/// Residuals are divided by `Δ_v A + Δ_w A`, which makes them invariant
/// under `A -> λA + μ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaturationReport {
    pub stabilizes_subspace: bool,
    /// Largest norm of the part of `Av`, `Aw` outside span{v, w}.
    pub subspace_residual: f64,
    /// `<w,Av> / <w,v>` as `[re, im]`; absent for orthogonal states.
    pub lambda: Option<[f64; 2]>,
    pub lambda_imag_residual: f64,
    pub lambda_in_hull: bool,
    /// Signed distance of `Re λ` inside the interval between the two means.
    pub hull_slack: f64,
    pub saturated: bool,
    pub qmie_gap: f64,
    pub delta: Discernability,
    pub bound: Option<f64>,
    pub orthogonal: bool,
    pub tolerance: f64,
}

/// Checks the two saturation conditions: `A` leaves span{v, w} invariant and
/// `<w,Av> = λ <w,v>` for a real `λ` between `<A>_v` and `<A>_w`.
pub fn check_saturation(a: &HermitianOperator, pair: &StatePair, tol: f64) -> Result<SaturationReport> {
    let stats = discernability(a, pair)?;
    let total = stats.sigma_v + stats.sigma_w;
    if total <= tol {
        return Err(Error::TrivialCase { total });
    }
    let (e1, e2) = build_onb(pair);
    let av = a.apply(pair.v())?;
    let aw = a.apply(pair.w())?;
    let outside = |x: &ComplexVector| -> Result<f64> {
        let c1 = inner(&e1, x)?;
        let c2 = inner(&e2, x)?;
        Ok(x.combine(Complex64::new(1.0, 0.0), &e1, -c1)?.combine(Complex64::new(1.0, 0.0), &e2, -c2)?.norm())
    };
    let subspace_residual = outside(&av)?.max(outside(&aw)?) / total;
    let stabilizes_subspace = subspace_residual <= tol;
    let qmie_gap = qmie_gap(a, pair.v(), pair.w())?;

    if pair.is_orthogonal() {
        return Ok(SaturationReport {
            stabilizes_subspace,
            subspace_residual,
            lambda: None,
            lambda_imag_residual: 0.0,
            lambda_in_hull: false,
            hull_slack: f64::NAN,
            saturated: false,
            qmie_gap,
            delta: stats.delta,
            bound: None,
            orthogonal: true,
            tolerance: tol,
        });
    }

    let lambda = inner(pair.w(), &av)? / inner(pair.w(), pair.v())?;
    let lambda_imag_residual = lambda.im.abs() / total;
    let lo = stats.mean_v.min(stats.mean_w);
    let hi = stats.mean_v.max(stats.mean_w);
    let hull_slack = (lambda.re - lo).min(hi - lambda.re) / total;
    let lambda_in_hull = hull_slack >= -tol;
    let saturated = stabilizes_subspace && lambda_imag_residual <= tol && lambda_in_hull;
    Ok(SaturationReport {
        stabilizes_subspace,
        subspace_residual,
        lambda: Some([lambda.re, lambda.im]),
        lambda_imag_residual,
        lambda_in_hull,
        hull_slack,
        saturated,
        qmie_gap,
        delta: stats.delta,
        bound: Some(pair.theta().tan()),
        orthogonal: false,
        tolerance: tol,
    })
}

fn check_prior(p1: f64) -> Result<()> {
    if p1 > 0.0 && p1 < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("prior p1 = {p1} outside (0, 1)")))
    }
}

/// Optimal single-shot probability of correct identification with a
/// two-outcome measurement: `(1 + sqrt(1 - 4 p1 p2 cos²θ)) / 2`.
pub fn min_error_prob(theta: f64, p1: f64) -> Result<f64> {
    check_prior(p1)?;
    if !(0.0..=PI / 2.0).contains(&theta) {
        return Err(Error::InvalidArgument(format!("theta = {theta} outside [0, pi/2]")));
    }
    let p2 = 1.0 - p1;
    let c = theta.cos();
    Ok(0.5 * (1.0 + (1.0 - 4.0 * p1 * p2 * c * c).max(0.0).sqrt()))
}

/// Which closed form applies to unambiguous discrimination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnambiguousRegime {
    /// `sqrt(min p / max p) >= cos θ`: value `1 - 2 sqrt(p1 p2) cos θ`.
    Balanced,
    /// `sqrt(min p / max p) < cos θ`: value `max p · sin²θ`.
    Dominant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnambiguousOptimum {
    pub value: f64,
    pub regime: UnambiguousRegime,
}

/// Optimal success probability of unambiguous discrimination.
pub fn unambiguous_max(theta: f64, p1: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= PI / 2.0) {
        return Err(Error::InvalidArgument(format!("theta = {theta} outside (0, pi/2]")));
    }
    Ok(unambiguous_optimum(overlap_of_angle(theta), p1)?.value)
}

/// `cos θ`, with overlaps below the orthogonality threshold snapped to zero
/// as [`crate::linalg::make_state_pair`] does.
pub fn overlap_of_angle(theta: f64) -> f64 {
    let c = theta.cos();
    if c <= tolerance::CONSTRUCTOR {
        0.0
    } else {
        c
    }
}

/// Unambiguous optimum parametrized by the overlap `cos θ` directly.
pub fn unambiguous_optimum(cos_theta: f64, p1: f64) -> Result<UnambiguousOptimum> {
    check_prior(p1)?;
    if !(0.0..1.0).contains(&cos_theta) {
        return Err(Error::InvalidArgument(format!("cos(theta) = {cos_theta} outside [0, 1)")));
    }
    let p2 = 1.0 - p1;
    let (lo, hi) = (p1.min(p2), p1.max(p2));
    if (lo / hi).sqrt() >= cos_theta {
        Ok(UnambiguousOptimum {
            value: 1.0 - 2.0 * (p1 * p2).sqrt() * cos_theta,
            regime: UnambiguousRegime::Balanced,
        })
    } else {
        Ok(UnambiguousOptimum {
            value: hi * (1.0 - cos_theta * cos_theta),
            regime: UnambiguousRegime::Dominant,
        })
    }
}

/// State label attached to a measurement outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    First,
    Second,
    Inconclusive,
}

/// Probability `p1 Σ_{a→1} <v,P_a v> + p2 Σ_{a→2} <w,P_a w>` of correct identification.
///
/// Every eigenvalue of `A` must appear in `assignment` (matched within the
/// eigenvalue merge tolerance); extra entries are ignored.
pub fn detection_prob(
    a: &HermitianOperator,
    pair: &StatePair,
    p1: f64,
    assignment: &[(f64, Outcome)],
) -> Result<f64> {
    check_prior(p1)?;
    let spectrum = eigendecompose(a);
    let weights_v = spectrum.weights(pair.v())?;
    let weights_w = spectrum.weights(pair.w())?;
    let tol = tolerance::EIGEN_MERGE * a.frobenius_norm().max(1.0);
    let mut total = 0.0;
    for (k, &eigenvalue) in spectrum.eigenvalues.iter().enumerate() {
        let label = assignment
            .iter()
            .find(|(value, _)| (value - eigenvalue).abs() <= tol)
            .map(|&(_, label)| label)
            .ok_or(Error::UnmappedEigenvalue(eigenvalue))?;
        total += match label {
            Outcome::First => p1 * weights_v[k],
            Outcome::Second => (1.0 - p1) * weights_w[k],
            Outcome::Inconclusive => 0.0,
        };
    }
    Ok(total)
}
