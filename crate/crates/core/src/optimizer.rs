//! Derivative-free search over Hermitian operators.
//!
//! Used as an independent check of the closed-form maxima: the largest
//! discernability found by multistart Nelder-Mead must approach, and never
//! exceed, `tan(theta)`; the best two-outcome detection probability must
//! match the minimum-error formula.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discrimination::{build_onb, discernability, saturating_observable, Discernability};
use crate::error::{Error, Result};
use crate::linalg::{inner, moments, ComplexVector, HermitianOperator, StatePair};
use crate::sampling::trial_rng;
use crate::tolerance;

/// Largest dimension accepted by [`maximize_delta`].
pub const MAX_SEARCH_DIM: usize = 4;

/// Real coordinates of a Hermitian matrix: the diagonal, then `(re, im)` of
/// each strictly-upper entry in row-major order, with the upper entry equal
/// to `re - i·im` (so the lower entry is `re + i·im`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HermitianParams {
    pub dim: usize,
    pub params: Vec<f64>,
}

impl HermitianParams {
    pub fn new(dim: usize, params: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Empty);
        }
        if params.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: params.len() });
        }
        Ok(Self { dim, params })
    }

    pub fn from_hermitian(a: &HermitianOperator) -> Self {
        let dim = a.dim();
        let mut params = Vec::with_capacity(dim * dim);
        params.extend((0..dim).map(|i| a.entry(i, i).re));
        for i in 0..dim {
            for j in (i + 1)..dim {
                let lower = a.entry(j, i);
                params.push(lower.re);
                params.push(lower.im);
            }
        }
        Self { dim, params }
    }
}

pub fn to_hermitian(p: &HermitianParams) -> Result<HermitianOperator> {
    let p = HermitianParams::new(p.dim, p.params.clone())?;
    Ok(HermitianOperator::from_hermitian_unchecked(params_matrix(p.dim, &p.params)))
}

fn params_matrix(dim: usize, params: &[f64]) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = Complex64::new(params[i], 0.0);
    }
    let mut k = dim;
    for i in 0..dim {
        for j in (i + 1)..dim {
            let lower = Complex64::new(params[k], params[k + 1]);
            m[(j, i)] = lower;
            m[(i, j)] = lower.conj();
            k += 2;
        }
    }
    m
}

/// Search budget and schedule for [`maximize_delta`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Edge length of the initial simplex.
    pub initial_step: f64,
    /// Simplex diameter at which a local search stops.
    pub xtol: f64,
    /// Objective spread across the simplex at which a local search stops.
    pub ftol: f64,
    /// Noise added to family-seeded starting points.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 16,
            max_evals: 20_000,
            initial_step: 0.5,
            xtol: 1e-10,
            ftol: 1e-14,
            perturbation: 0.1,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub best_value: f64,
    pub best_operator: HermitianOperator,
    pub best_restart: usize,
    pub restarts: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// `tan(theta)` for comparison.
    pub bound: f64,
}

/// Outcome of one local minimization.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder-Mead simplex minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
///
/// `f` may return `+inf` for infeasible points. The search stops when the
/// simplex is smaller than `xtol` and its values agree within `ftol`, or when
/// `max_evals` is spent.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, xtol: f64, ftol: f64, max_evals: usize) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(&ai, &bi)| ai + t * (bi - ai)).collect()
    };

    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if best.is_finite() && worst - best <= ftol * best.abs().max(1.0) && diameter <= xtol {
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst_x = simplex[n].0.clone();
        let reflected = lerp(&centroid, &worst_x, -1.0);
        let fr = eval(&reflected, &mut evals);

        if fr < best {
            let expanded = lerp(&centroid, &worst_x, -2.0);
            let fe = eval(&expanded, &mut evals);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst {
            let x = lerp(&centroid, &reflected, 0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        } else {
            let x = lerp(&centroid, &worst_x, 0.5);
            let v = eval(&x, &mut evals);
            (x, v)
        };
        if fc < worst.min(fr) {
            simplex[n] = (contracted, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = lerp(&anchor, &vertex.0, 0.5);
            let v = eval(&x, &mut evals);
            *vertex = (x, v);
        }
    }

    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, evaluations: evals, converged }
}

/// Discernability as a search objective; minus infinity where the total
/// uncertainty drops below the search floor.
fn delta_objective(dim: usize, params: &[f64], pair: &StatePair) -> f64 {
    let a = HermitianOperator::from_hermitian_unchecked(params_matrix(dim, params));
    let (Ok((mean_v, sigma_v)), Ok((mean_w, sigma_w))) = (moments(&a, pair.v()), moments(&a, pair.w())) else {
        return f64::NEG_INFINITY;
    };
    let total = sigma_v + sigma_w;
    if total.is_nan() || total < tolerance::SEARCH_FLOOR {
        return f64::NEG_INFINITY;
    }
    (mean_w - mean_v).abs() / total
}

struct RestartOutcome {
    params: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
    max_seen: f64,
}

fn starting_point(pair: &StatePair, dim: usize, restart: usize, config: &SearchConfig) -> Result<Vec<f64>> {
    let mut rng = trial_rng(config.seed, restart as u64);
    let gaussian = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 { StandardNormal.sample(rng) };
    if restart.is_multiple_of(2) {
        return Ok((0..dim * dim).map(|_| gaussian(&mut rng)).collect());
    }
    let (lo, hi) = (pair.theta(), PI - pair.theta());
    let alpha = rng.random_range(lo..=hi);
    let magnitude: f64 = rng.random_range(0.5..2.0);
    let scale = if rng.random::<bool>() { magnitude } else { -magnitude };
    let shift = gaussian(&mut rng);
    let member = saturating_observable(pair, alpha, scale, shift)?;
    let mut params = HermitianParams::from_hermitian(&member).params;
    for p in params.iter_mut() {
        *p += config.perturbation * gaussian(&mut rng);
    }
    Ok(params)
}

fn run_restart(pair: &StatePair, dim: usize, restart: usize, config: &SearchConfig) -> Result<RestartOutcome> {
    let mut x = starting_point(pair, dim, restart, config)?;
    let mut max_seen = f64::NEG_INFINITY;
    let mut objective = |p: &[f64]| {
        let d = delta_objective(dim, p, pair);
        if d > max_seen {
            max_seen = d;
        }
        -d
    };
    let mut evaluations = 0;
    let mut value = f64::INFINITY;
    let mut converged = false;
    let mut step = config.initial_step;
    // Re-seeding the simplex at the incumbent counters premature collapse.
    while evaluations < config.max_evals {
        let m = nelder_mead(&mut objective, &x, step, config.xtol, config.ftol, config.max_evals - evaluations);
        evaluations += m.evaluations;
        let improved = m.value < value - config.ftol * value.abs().max(1.0);
        if m.value <= value {
            x = m.x;
            value = m.value;
        }
        converged = m.converged;
        if !m.converged || !improved {
            break;
        }
        step = (step * 0.1).max(1e-6);
    }
    Ok(RestartOutcome { params: x, value: -value, evaluations, converged, max_seen })
}

/// Multistart search for the largest discernability of a `dim`-dimensional observable.
///
/// Even restarts start from Gaussian random coordinates, odd restarts from
/// a perturbed saturating observable. Every evaluation is checked against
/// `tan(theta) + 1e-9`.
pub fn maximize_delta(pair: &StatePair, dim: usize, config: &SearchConfig) -> Result<SearchResult> {
    if pair.is_orthogonal() {
        return Err(Error::BoundInfinite);
    }
    if dim < pair.dim() || dim > MAX_SEARCH_DIM {
        return Err(Error::InvalidArgument(format!(
            "search dimension {dim} must lie in [{}, {MAX_SEARCH_DIM}]",
            pair.dim()
        )));
    }
    if config.restarts == 0 || config.max_evals == 0 {
        return Err(Error::InvalidArgument("restarts and max_evals must be positive".into()));
    }
    let pair = pair.embed(dim)?;
    let bound = pair.theta().tan();

    let outcomes = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(&pair, dim, r, config))
        .collect::<Result<Vec<_>>>()?;

    let max_seen = outcomes.iter().map(|o| o.max_seen).fold(f64::NEG_INFINITY, f64::max);
    if max_seen > bound + 1e-9 {
        return Err(Error::InvariantViolation(format!(
            "search evaluated delta = {max_seen} above tan(theta) = {bound}"
        )));
    }

    // Highest value wins; ties go to the lowest restart index.
    let (best_restart, best) = outcomes
        .iter()
        .enumerate()
        .fold(None::<(usize, &RestartOutcome)>, |acc, (i, o)| match acc {
            Some((_, b)) if b.value >= o.value => acc,
            _ => Some((i, o)),
        })
        .expect("at least one restart");
    let best_operator = to_hermitian(&HermitianParams::new(dim, best.params.clone())?)?;
    let best_value = match discernability(&best_operator, &pair)?.delta {
        Discernability::Defined(d) => d,
        _ => f64::NEG_INFINITY,
    };
    Ok(SearchResult {
        best_value,
        best_operator,
        best_restart,
        restarts: config.restarts,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        converged: best.converged,
        bound,
    })
}

/// Best detection probability `p1 <v,Pv> + p2 <w,(1-P)w>` over rank-one
/// projectors `P` onto `cos φ e1 + e^{iχ} sin φ e2` in span{v, w}.
///
/// A `grid_resolution`² grid over `(φ, χ)` seeds a Nelder-Mead refinement.
pub fn maximize_detection(pair: &StatePair, p1: f64, grid_resolution: usize) -> Result<f64> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::InvalidArgument(format!("prior p1 = {p1} outside (0, 1)")));
    }
    if grid_resolution < 2 {
        return Err(Error::InvalidArgument("grid resolution must be at least 2".into()));
    }
    let (e1, e2) = build_onb(pair);
    let p2 = 1.0 - p1;
    let detection = |x: &[f64]| -> f64 {
        let u = e1
            .combine(Complex64::new(x[0].cos(), 0.0), &e2, Complex64::from_polar(x[0].sin(), x[1]))
            .expect("basis vectors share a dimension");
        let on_v = inner(&u, pair.v()).map(|z| z.norm_sqr()).unwrap_or(f64::NAN);
        let on_w = inner(&u, pair.w()).map(|z| z.norm_sqr()).unwrap_or(f64::NAN);
        p1 * on_v + p2 * (1.0 - on_w)
    };

    let phi_step = (PI / 2.0) / (grid_resolution - 1) as f64;
    let chi_step = TAU / grid_resolution as f64;
    let mut best = (f64::NEG_INFINITY, [0.0, 0.0]);
    for i in 0..grid_resolution {
        for j in 0..grid_resolution {
            let x = [i as f64 * phi_step, j as f64 * chi_step];
            let value = detection(&x);
            if value > best.0 {
                best = (value, x);
            }
        }
    }
    let refined = nelder_mead(|x| -detection(x), &best.1, 0.5 * phi_step, 1e-12, 1e-15, 10_000);
    Ok(best.0.max(-refined.value))
}

/// Unit vector helper used by tests and bindings: the direction `cos φ e1 + e^{iχ} sin φ e2`.
pub fn projector_direction(pair: &StatePair, phi: f64, chi: f64) -> ComplexVector {
    let (e1, e2) = build_onb(pair);
    e1.combine(Complex64::new(phi.cos(), 0.0), &e2, Complex64::from_polar(phi.sin(), chi))
        .expect("basis vectors share a dimension")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrimination::check_saturation;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn to_hermitian_examples() {
        let a = to_hermitian(&HermitianParams::new(2, vec![1.0, -1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(a, HermitianOperator::diag(&[1.0, -1.0]).unwrap());
        let a = to_hermitian(&HermitianParams::new(2, vec![0.0, 0.0, 1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(a, HermitianOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap());
        let a = to_hermitian(&HermitianParams::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(a.entry(0, 1), c(0.0, -1.0));
        assert_eq!(a.entry(1, 0), c(0.0, 1.0));
    }

    #[test]
    fn params_length_checked() {
        assert_eq!(
            HermitianParams::new(3, vec![0.0; 4]).unwrap_err(),
            Error::DimensionMismatch { expected: 9, found: 4 }
        );
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let m = nelder_mead(rosen, &[-1.2, 1.0], 0.5, 1e-10, 1e-16, 10_000);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn nelder_mead_respects_budget() {
        let m = nelder_mead(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[3.0; 6], 1.0, 1e-30, 0.0, 50);
        assert!(!m.converged);
        assert!(m.evaluations <= 50 + 7);
    }

    #[test]
    fn maximize_delta_dim2() {
        for theta in [FRAC_PI_3, FRAC_PI_4] {
            let pair = StatePair::from_angle(theta, 2).unwrap();
            let r = maximize_delta(&pair, 2, &SearchConfig::default()).unwrap();
            assert!(r.converged);
            assert!((r.best_value - theta.tan()).abs() < 1e-4, "{} vs {}", r.best_value, theta.tan());
            assert!(r.best_value <= theta.tan() + 1e-9);
        }
    }

    #[test]
    fn maximize_delta_dim3_finds_invariant_subspace() {
        let pair = StatePair::from_angle(FRAC_PI_3, 2).unwrap();
        let r = maximize_delta(&pair, 3, &SearchConfig::default()).unwrap();
        assert!((r.best_value - 3f64.sqrt()).abs() < 1e-4);
        let report = check_saturation(&r.best_operator, &pair.embed(3).unwrap(), 1e-3).unwrap();
        assert!(report.subspace_residual < 1e-3, "residual {}", report.subspace_residual);
    }

    #[test]
    fn maximize_delta_is_deterministic() {
        let pair = StatePair::from_angle(0.8, 2).unwrap();
        let config = SearchConfig { restarts: 4, max_evals: 3000, ..SearchConfig::default() };
        let a = maximize_delta(&pair, 3, &config).unwrap();
        let b = maximize_delta(&pair, 3, &config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn maximize_delta_rejects_orthogonal_and_large_dims() {
        let ortho = StatePair::from_angle(FRAC_PI_2, 2).unwrap();
        assert_eq!(maximize_delta(&ortho, 2, &SearchConfig::default()).unwrap_err(), Error::BoundInfinite);
        let pair = StatePair::from_angle(0.5, 2).unwrap();
        assert!(maximize_delta(&pair, 5, &SearchConfig::default()).is_err());
    }

    #[test]
    fn maximize_detection_examples() {
        let pair = StatePair::from_angle(FRAC_PI_3, 2).unwrap();
        assert!((maximize_detection(&pair, 0.5, 24).unwrap() - 0.933_012_701_892_219_3).abs() < 1e-4);
        let ortho = StatePair::from_angle(FRAC_PI_2, 2).unwrap();
        assert!((maximize_detection(&ortho, 0.5, 24).unwrap() - 1.0).abs() < 1e-4);
        // (1 + sqrt(1 - 4 * 0.16 * 0.25)) / 2
        assert!((maximize_detection(&pair, 0.8, 24).unwrap() - 0.958_257_569_495_584).abs() < 1e-4);
    }

    #[test]
    fn projector_direction_is_unit() {
        let pair = StatePair::from_angle(0.3, 3).unwrap();
        assert!(projector_direction(&pair, 0.7, 2.1).is_unit());
    }
}
