//! Identification of the generating state from the mean of `n` measurement outcomes.
//!
//! Each state induces a discrete outcome distribution on the spectrum of `A`.
//! A sample mean below the split point `x0` is attributed to the
//! lower-mean distribution, anything at or above `x0` to the other one.
//! Chebyshev's inequality bounds the misidentification probability by
//! `1 / (n δ²)` regardless of the priors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::discrimination::{discernability, Discernability};
use crate::error::{Error, Result};
use crate::linalg::{eigendecompose, ComplexVector, HermitianOperator, StatePair};
use crate::tolerance;

/// Discrete probability distribution on the real line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeDistribution {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl OutcomeDistribution {
    /// Validates and normalizes bookkeeping; probabilities within `1e-12`
    /// below zero are clamped.
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if values.len() != probs.len() {
            return Err(Error::DimensionMismatch { expected: values.len(), found: probs.len() });
        }
        if let Some(&p) = probs.iter().find(|&&p| p < -tolerance::CONSTRUCTOR || !p.is_finite()) {
            return Err(Error::InvalidArgument(format!("negative probability {p}")));
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tolerance::DERIVED {
            return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
        }
        let mean: f64 = values.iter().zip(&probs).map(|(x, p)| x * p).sum();
        let variance: f64 = values.iter().zip(&probs).map(|(x, p)| p * (x - mean).powi(2)).sum();
        Ok(Self { values, probs, mean, variance })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Distribution of the outcomes when `A` is measured in the pure state `psi`.
pub fn outcome_distribution(a: &HermitianOperator, psi: &ComplexVector) -> Result<OutcomeDistribution> {
    psi.ensure_unit()?;
    let spectrum = eigendecompose(a);
    let probs = spectrum.weights(psi)?;
    OutcomeDistribution::new(spectrum.eigenvalues, probs)
}

/// Split point and discernability of two outcome distributions, ordered so that `x1 < x2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdRule {
    pub x1: f64,
    pub x2: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub x0: f64,
    pub delta: f64,
    /// True when the inputs were given in decreasing-mean order.
    pub swapped: bool,
    /// Side whose uncertainty vanishes, if any. Its samples all sit at the
    /// split point, so they are assigned to it within [`ThresholdRule::tie_band`].
    pub point_mass: Option<Label>,
}

impl ThresholdRule {
    pub fn from_moments(x1: f64, sigma1: f64, x2: f64, sigma2: f64) -> Result<Self> {
        if (x2 - x1).abs() <= tolerance::CONSTRUCTOR {
            return Err(Error::IndistinguishableByMean);
        }
        if sigma1 + sigma2 <= tolerance::CONSTRUCTOR {
            return Err(Error::Degenerate);
        }
        let swapped = x1 > x2;
        let (x1, sigma1, x2, sigma2) = if swapped { (x2, sigma2, x1, sigma1) } else { (x1, sigma1, x2, sigma2) };
        let total = sigma1 + sigma2;
        let spread = x2 - x1;
        let (x0, point_mass) = if sigma1 <= tolerance::POINT_MASS * spread {
            (x1, Some(Label::First))
        } else if sigma2 <= tolerance::POINT_MASS * spread {
            (x2, Some(Label::Second))
        } else {
            (((sigma2 * x1 + sigma1 * x2) / total).clamp(x1, x2), None)
        };
        Ok(Self { x1, x2, sigma1, sigma2, x0, delta: spread / total, swapped, point_mass })
    }

    /// Half-width of the interval around `x0` resolved in favour of a point mass.
    pub fn tie_band(&self) -> f64 {
        tolerance::POINT_MASS * (self.x2 - self.x1)
    }

    /// The label this rule assigns to samples truly drawn from input `source` (1 or 2).
    pub fn label_of_source(&self, source: Label) -> Label {
        match (source, self.swapped) {
            (label, false) => label,
            (Label::First, true) => Label::Second,
            (Label::Second, true) => Label::First,
        }
    }
}

/// Threshold rule for two distributions.
pub fn threshold(d1: &OutcomeDistribution, d2: &OutcomeDistribution) -> Result<ThresholdRule> {
    ThresholdRule::from_moments(d1.mean, d1.std_dev(), d2.mean, d2.std_dev())
}

/// `1 / (n δ²)`.
pub fn chebyshev_bound(delta: f64, n: u64) -> Result<f64> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    check_count("n", n)?;
    Ok(1.0 / (n as f64 * delta * delta))
}

fn check_count(name: &str, value: u64) -> Result<()> {
    if value == 0 {
        Err(Error::InvalidArgument(format!("{name} must be positive")))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Label {
    First = 1,
    Second = 2,
}

/// Label 1 below the split point, label 2 at or above it.
///
/// When one side is a point mass the split point coincides with it and the
/// tie goes to that side, with a band absorbing rounding in the sample mean.
pub fn identify(mean: f64, rule: &ThresholdRule) -> Label {
    let first = match rule.point_mass {
        Some(Label::First) => mean <= rule.x0 + rule.tie_band(),
        Some(Label::Second) => mean < rule.x0 - rule.tie_band(),
        None => mean < rule.x0,
    };
    if first {
        Label::First
    } else {
        Label::Second
    }
}

/// Inverse-CDF sampler over a discrete distribution.
#[derive(Debug, Clone)]
pub struct Sampler {
    values: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    pub fn new(dist: &OutcomeDistribution) -> Self {
        let mut acc = 0.0;
        let cumulative = dist
            .probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Self { values: dist.values.clone(), cumulative }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.values.len() - 1);
        self.values[idx]
    }

    pub fn sample_mean<R: Rng + ?Sized>(&self, n: u64, rng: &mut R) -> f64 {
        let sum: f64 = (0..n).map(|_| self.draw(rng)).sum();
        sum / n as f64
    }
}

/// Mean of `n` independent draws from `dist`.
pub fn sample_mean<R: Rng + ?Sized>(dist: &OutcomeDistribution, n: u64, rng: &mut R) -> f64 {
    Sampler::new(dist).sample_mean(n, rng)
}

/// Random stream for trial `index` under `seed`; independent of evaluation order.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub n: u64,
    pub trials: u64,
    pub p1: f64,
    pub errors: u64,
    pub empirical_error: f64,
    pub cheb_bound: f64,
    /// Discernability of the two outcome distributions; `null` in JSON when infinite.
    pub delta: f64,
    pub x0: f64,
    pub seed: u64,
}

impl TrialReport {
    /// Binomial standard error of an error rate equal to the Chebyshev bound.
    pub fn bound_standard_error(&self) -> f64 {
        let b = self.cheb_bound.min(1.0);
        (b * (1.0 - b) / self.trials as f64).sqrt()
    }

    /// True when the empirical rate exceeds the bound by more than `k` standard errors.
    pub fn violates_bound(&self, k: f64) -> bool {
        self.empirical_error > self.cheb_bound + k * self.bound_standard_error()
    }
}

/// Monte Carlo estimate of the misidentification probability.
///
/// Trial `i` draws the true state (first with probability `p1`) and `n`
/// outcomes from the stream `trial_rng(seed, i)`, so the report is
/// bit-identical for any thread count.
pub fn run_experiment(
    a: &HermitianOperator,
    pair: &StatePair,
    p1: f64,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<TrialReport> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::InvalidArgument(format!("prior p1 = {p1} outside (0, 1)")));
    }
    check_count("n", n)?;
    check_count("trials", trials)?;
    let stats = discernability(a, pair)?;
    let d_v = outcome_distribution(a, pair.v())?;
    let d_w = outcome_distribution(a, pair.w())?;

    let (rule, delta, cheb_bound) = match stats.delta {
        Discernability::Undefined => return Err(Error::UndefinedDiscernability),
        Discernability::Infinite => {
            // Disjoint point masses: any split strictly between the means is exact.
            let rule = ThresholdRule {
                x1: d_v.mean.min(d_w.mean),
                x2: d_v.mean.max(d_w.mean),
                sigma1: 0.0,
                sigma2: 0.0,
                x0: 0.5 * (d_v.mean + d_w.mean),
                delta: f64::INFINITY,
                swapped: d_v.mean > d_w.mean,
                point_mass: None,
            };
            (rule, f64::INFINITY, 0.0)
        }
        Discernability::Defined(_) => {
            let rule = threshold(&d_v, &d_w)?;
            let bound = chebyshev_bound(rule.delta, n)?;
            (rule, rule.delta, bound)
        }
    };

    let samplers = [Sampler::new(&d_v), Sampler::new(&d_w)];
    let expected = [rule.label_of_source(Label::First), rule.label_of_source(Label::Second)];
    let errors: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let source = if rng.random::<f64>() < p1 { 0 } else { 1 };
            let mean = samplers[source].sample_mean(n, &mut rng);
            u64::from(identify(mean, &rule) != expected[source])
        })
        .sum();

    Ok(TrialReport {
        n,
        trials,
        p1,
        errors,
        empirical_error: errors as f64 / trials as f64,
        cheb_bound,
        delta,
        x0: rule.x0,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevCheck {
    pub empirical_tail: f64,
    pub bound: f64,
    pub standard_error: f64,
}

impl ChebyshevCheck {
    /// Whether the empirical tail stays within the bound plus three standard errors.
    pub fn holds(&self) -> bool {
        self.empirical_tail <= self.bound + 3.0 * self.standard_error
    }
}

/// Monte Carlo frequency of `|m_n - mean| >= t` against `(σ/t)² / n`.
pub fn chebyshev_check(
    dist: &OutcomeDistribution,
    t: f64,
    n: u64,
    trials: u64,
    seed: u64,
) -> Result<ChebyshevCheck> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::InvalidArgument(format!("t = {t} must be positive")));
    }
    check_count("n", n)?;
    check_count("trials", trials)?;
    let sampler = Sampler::new(dist);
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            u64::from((sampler.sample_mean(n, &mut rng) - dist.mean).abs() >= t)
        })
        .sum();
    let bound = dist.variance / (n as f64 * t * t);
    let b = bound.min(1.0);
    Ok(ChebyshevCheck {
        empirical_tail: hits as f64 / trials as f64,
        bound,
        standard_error: (b * (1.0 - b) / trials as f64).sqrt(),
    })
}

/// Largest `atoms^n` accepted by [`exact_tail`].
pub const ENUMERATION_LIMIT: u64 = 1 << 24;

/// Exact `P(|m_n - mean| >= t)` by enumerating every outcome string of length `n`.
pub fn exact_tail(dist: &OutcomeDistribution, t: f64, n: u32) -> Result<f64> {
    let atoms = dist.values.len() as u64;
    let strings = atoms
        .checked_pow(n)
        .filter(|&s| s <= ENUMERATION_LIMIT)
        .ok_or_else(|| Error::InvalidArgument(format!("{atoms}^{n} outcome strings exceed enumeration limit")))?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut tail = 0.0;
    let mut digits = vec![0usize; n as usize];
    for _ in 0..strings {
        let (sum, prob) = digits
            .iter()
            .fold((0.0, 1.0), |(s, p), &d| (s + dist.values[d], p * dist.probs[d]));
        if (sum / n as f64 - dist.mean).abs() >= t {
            tail += prob;
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < atoms as usize {
                break;
            }
            *d = 0;
        }
    }
    Ok(tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::{saturating_observable, simple_optimal};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn coin() -> OutcomeDistribution {
        OutcomeDistribution::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn outcome_distribution_examples() {
        let z = HermitianOperator::diag(&[1.0, -1.0]).unwrap();
        let up = ComplexVector::from_real(&[1.0, 0.0]).unwrap();
        let d = outcome_distribution(&z, &up).unwrap();
        assert_eq!(d.values.len(), 2);
        assert!((d.values[0] + 1.0).abs() < 1e-15 && (d.values[1] - 1.0).abs() < 1e-15);
        assert!(d.probs[0].abs() < 1e-15 && (d.probs[1] - 1.0).abs() < 1e-15);

        let pair = StatePair::from_angle(FRAC_PI_3, 2).unwrap();
        let d = outcome_distribution(&simple_optimal(&pair), pair.v()).unwrap();
        assert!((d.values[0] + 1.0).abs() < 1e-12 && (d.values[1] - 1.0).abs() < 1e-12);
        assert!((d.probs[0] - 0.933_012_701_892_219_3).abs() < 1e-12);
        assert!((d.probs[1] - 0.066_987_298_107_780_68).abs() < 1e-12);

        let id = HermitianOperator::identity(3).unwrap();
        let psi = ComplexVector::from_real(&[0.6, 0.0, 0.8]).unwrap();
        let d = outcome_distribution(&id, &psi).unwrap();
        assert_eq!(d.values.len(), 1);
        assert!((d.probs[0] - 1.0).abs() < 1e-12);
        assert!(d.variance.abs() < 1e-15);
    }

    #[test]
    fn distribution_validation() {
        assert!(OutcomeDistribution::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(OutcomeDistribution::new(vec![0.0, 1.0], vec![1.1, -0.1]).is_err());
        assert!(OutcomeDistribution::new(vec![0.0], vec![0.5, 0.5]).is_err());
        let d = OutcomeDistribution::new(vec![0.0, 1.0], vec![1.0 + 1e-13, -1e-13]).unwrap();
        assert_eq!(d.probs[1], 0.0);
    }

    #[test]
    fn threshold_examples() {
        let r = ThresholdRule::from_moments(0.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(r.x0, 0.5);
        let r = ThresholdRule::from_moments(0.0, 1.0, 3.0, 2.0).unwrap();
        assert_eq!(r.x0, 1.0);
        assert_eq!(r.delta, 1.0);
        assert!((r.x1 + r.sigma1 * r.delta - r.x0).abs() < 1e-12);
        assert!((r.x2 - r.sigma2 * r.delta - r.x0).abs() < 1e-12);
    }

    #[test]
    fn threshold_relabels_and_rejects() {
        let r = ThresholdRule::from_moments(3.0, 2.0, 0.0, 1.0).unwrap();
        assert!(r.swapped);
        assert_eq!((r.x1, r.x2, r.sigma1, r.sigma2, r.x0), (0.0, 3.0, 1.0, 2.0, 1.0));
        assert_eq!(r.label_of_source(Label::First), Label::Second);
        assert_eq!(ThresholdRule::from_moments(1.0, 1.0, 1.0, 2.0).unwrap_err(), Error::IndistinguishableByMean);
        assert_eq!(ThresholdRule::from_moments(0.0, 0.0, 1.0, 0.0).unwrap_err(), Error::Degenerate);
    }

    #[test]
    fn chebyshev_bound_examples() {
        assert!((chebyshev_bound(1.0, 100).unwrap() - 0.01).abs() < 1e-18);
        assert!((chebyshev_bound(3f64.sqrt(), 100).unwrap() - 1.0 / 300.0).abs() < 1e-15);
        let near_orthogonal = chebyshev_bound((FRAC_PI_2 - 1e-6).tan(), 1).unwrap();
        assert!(near_orthogonal < 1e-11);
        assert!(chebyshev_bound(0.0, 10).is_err());
    }

    #[test]
    fn identify_examples() {
        let r = ThresholdRule::from_moments(0.0, 1.0, 3.0, 2.0).unwrap();
        assert_eq!(identify(r.x0, &r), Label::Second);
        assert_eq!(identify(r.x0 - 1e-9, &r), Label::First);
        assert_eq!(identify(r.x2, &r), Label::Second);
    }

    #[test]
    fn point_mass_keeps_its_own_samples() {
        let r = ThresholdRule::from_moments(0.0, 1e-17, 1.0, 0.5).unwrap();
        assert_eq!((r.x0, r.point_mass), (0.0, Some(Label::First)));
        assert_eq!(identify(1e-15, &r), Label::First);
        assert_eq!(identify(-1e-15, &r), Label::First);
        assert_eq!(identify(1e-6, &r), Label::Second);
        let r = ThresholdRule::from_moments(0.0, 0.5, 1.0, 0.0).unwrap();
        assert_eq!((r.x0, r.point_mass), (1.0, Some(Label::Second)));
        assert_eq!(identify(1.0 - 1e-15, &r), Label::Second);
        assert_eq!(identify(1.0 - 1e-6, &r), Label::First);
    }

    #[test]
    fn boundary_members_respect_the_bound() {
        let pair = StatePair::from_angle(0.6, 2).unwrap();
        for alpha in [0.6, PI - 0.6] {
            let a = saturating_observable(&pair, alpha, 1.0, 0.0).unwrap();
            let r = run_experiment(&a, &pair, 0.5, 10, 20_000, 3).unwrap();
            assert!(!r.violates_bound(3.0), "alpha {alpha}: {r:?}");
        }
    }

    #[test]
    fn sample_mean_of_point_mass() {
        let d = OutcomeDistribution::new(vec![2.5], vec![1.0]).unwrap();
        let mut rng = trial_rng(3, 0);
        assert_eq!(sample_mean(&d, 17, &mut rng), 2.5);
    }

    #[test]
    fn sample_mean_is_reproducible() {
        let a = sample_mean(&coin(), 4, &mut trial_rng(0x5EED, 9));
        let b = sample_mean(&coin(), 4, &mut trial_rng(0x5EED, 9));
        assert_eq!(a.to_bits(), b.to_bits());
        assert!([-1.0, -0.5, 0.0, 0.5, 1.0].contains(&a));
    }

    #[test]
    fn sample_mean_concentrates() {
        let n = 10_000;
        let inside = (0..100u64)
            .filter(|&s| sample_mean(&coin(), n, &mut trial_rng(s, 0)).abs() <= 5.0 / (n as f64).sqrt())
            .count();
        assert!(inside >= 99);
    }

    #[test]
    fn experiment_orthogonal_has_no_errors() {
        let pair = StatePair::from_angle(FRAC_PI_2, 2).unwrap();
        let z = HermitianOperator::diag(&[1.0, -1.0]).unwrap();
        for n in [1, 7] {
            let r = run_experiment(&z, &pair, 0.5, n, 2000, 1).unwrap();
            assert_eq!(r.errors, 0);
            assert_eq!(r.cheb_bound, 0.0);
        }
    }

    #[test]
    fn experiment_respects_bound_and_improves_with_n() {
        let pair = StatePair::from_angle(FRAC_PI_4, 2).unwrap();
        let a = saturating_observable(&pair, FRAC_PI_2, 1.0, 0.0).unwrap();
        let r100 = run_experiment(&a, &pair, 0.5, 100, 20_000, 42).unwrap();
        assert!((r100.cheb_bound - 0.01).abs() < 1e-12);
        assert!(r100.empirical_error <= r100.cheb_bound);
        let r1 = run_experiment(&a, &pair, 0.5, 1, 20_000, 42).unwrap();
        // One draw: error rate is (1 - sin θ)/2 ≈ 0.146, standard error ≈ 0.0025.
        assert!((r1.empirical_error - 0.146_446_609_406_726_2).abs() < 0.0125);
        assert!(r100.empirical_error < r1.empirical_error);
    }

    #[test]
    fn experiment_is_deterministic() {
        let pair = StatePair::from_angle(0.4, 2).unwrap();
        let a = saturating_observable(&pair, 1.0, 1.0, 0.0).unwrap();
        let r1 = run_experiment(&a, &pair, 0.3, 5, 5_000, 99).unwrap();
        let r2 = run_experiment(&a, &pair, 0.3, 5, 5_000, 99).unwrap();
        assert_eq!(r1, r2);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let r3 = pool.install(|| run_experiment(&a, &pair, 0.3, 5, 5_000, 99).unwrap());
        assert_eq!(r1, r3);
    }

    #[test]
    fn experiment_rejects_undefined_and_bad_arguments() {
        let pair = StatePair::from_angle(0.4, 2).unwrap();
        let id = HermitianOperator::identity(2).unwrap();
        assert_eq!(run_experiment(&id, &pair, 0.5, 3, 10, 0).unwrap_err(), Error::UndefinedDiscernability);
        let a = simple_optimal(&pair);
        assert!(run_experiment(&a, &pair, 0.5, 3, 0, 0).is_err());
        assert!(run_experiment(&a, &pair, 1.0, 3, 10, 0).is_err());
    }

    #[test]
    fn chebyshev_check_examples() {
        let point = OutcomeDistribution::new(vec![1.0], vec![1.0]).unwrap();
        assert_eq!(chebyshev_check(&point, 0.1, 5, 100, 0).unwrap().empirical_tail, 0.0);

        let c = chebyshev_check(&coin(), 1.0, 1, 1000, 0).unwrap();
        assert_eq!(c.empirical_tail, 1.0);
        assert_eq!(c.bound, 1.0);

        let c = chebyshev_check(&coin(), 0.5, 4, 20_000, 8).unwrap();
        assert_eq!(c.bound, 1.0);
        assert!((c.empirical_tail - 0.625).abs() < 0.02);
        assert!(c.holds());
    }

    #[test]
    fn exact_tail_examples() {
        assert_eq!(exact_tail(&coin(), 1.0, 1).unwrap(), 1.0);
        // P(|mean| >= 1/2) over 16 equally likely strings: all but the 6 balanced ones.
        assert_eq!(exact_tail(&coin(), 0.5, 4).unwrap(), 0.625);
        assert!(exact_tail(&coin(), 0.5, 40).is_err());
    }
}
