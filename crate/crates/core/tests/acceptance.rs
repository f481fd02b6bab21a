//! Acceptance criteria, run in order with one PASS/FAIL line each.
//! The process exits non-zero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::io::Write;
use std::time::Instant;

use common::{linspace, random_direction, random_hermitian, random_unit};
use discern_core::discrimination::rotated_observable;
use discern_core::sampling::trial_rng;
use discern_core::tolerance::{DELTA_MATCH, SATURATION};
use discern_core::*;
use rand::Rng;

type Verdict = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn delta_of(a: &HermitianOperator, pair: &StatePair) -> Result<f64> {
    discernability(a, pair)?.delta.value().ok_or(Error::UndefinedDiscernability)
}

fn saturating_family_reaches_bound() -> Verdict {
    let mut worst: f64 = 0.0;
    for k in 1..=15 {
        let theta = 0.1 * k as f64;
        let pair = StatePair::from_angle(theta, 2).map_err(|e| e.to_string())?;
        for alpha in linspace(theta, PI - theta, 20) {
            let a = saturating_observable(&pair, alpha, 1.0, 0.0).map_err(|e| e.to_string())?;
            let d = delta_of(&a, &pair).map_err(|e| e.to_string())?;
            worst = worst.max((d - theta.tan()).abs());
        }
    }
    let msg = format!("300 members, max |delta - tan theta| = {worst:.2e} (tol 1e-10)");
    if worst <= 1e-10 { Ok(msg) } else { Err(msg) }
}

fn qmie_never_violated() -> Verdict {
    let mut worst = f64::INFINITY;
    for dim in 2..=5usize {
        let mut rng = trial_rng(0x51E5, dim as u64);
        for _ in 0..10_000 {
            let a = random_hermitian(&mut rng, dim);
            let v = random_unit(&mut rng, dim);
            let w = random_unit(&mut rng, dim);
            worst = worst.min(qmie_gap(&a, &v, &w).map_err(|e| e.to_string())?);
        }
    }
    let msg = format!("40000 draws, min gap = {worst:.3e} (tol -1e-10)");
    if worst >= -1e-10 { Ok(msg) } else { Err(msg) }
}

fn saturation_equivalence() -> Verdict {
    let mut rng = trial_rng(0x5A7, 0);
    let mut cases: Vec<(StatePair, HermitianOperator)> = Vec::new();
    let err = |e: Error| e.to_string();

    for k in 1..=15 {
        let theta = 0.1 * k as f64;
        for dim in [2, 3] {
            let pair = StatePair::from_angle(theta, dim).map_err(err)?;
            for alpha in linspace(theta, PI - theta, 20) {
                cases.push((pair.clone(), saturating_observable(&pair, alpha, 1.0, 0.0).map_err(err)?));
            }
            for alpha in [theta, PI - theta] {
                let lambda = rng.random_range(0.2..4.0);
                let mu = rng.random_range(-3.0..3.0);
                cases.push((pair.clone(), saturating_observable(&pair, alpha, lambda, mu).map_err(err)?));
            }
            // just outside the range: below the bound by more than the match tolerance
            for alpha in [theta - 1e-3, PI - theta + 1e-3] {
                cases.push((pair.clone(), rotated_observable(&pair, alpha)));
            }
        }
    }
    for _ in 0..1000 {
        let dim = rng.random_range(2..=4);
        let pair = make_state_pair(random_unit(&mut rng, dim), random_unit(&mut rng, dim)).map_err(err)?;
        cases.push((pair, random_hermitian(&mut rng, dim)));
    }
    for k in 0..1000 {
        let dim = rng.random_range(2..=4);
        let theta = rng.random_range(0.05..1.5);
        let pair = StatePair::from_angle(theta, dim).map_err(err)?;
        let alpha = rng.random_range(theta..=PI - theta);
        let base = saturating_observable(&pair, alpha, 1.0, 0.0).map_err(err)?;
        let eps = rng.random_range(0.01..0.3);
        let kick = if dim > 2 && k % 4 == 0 {
            // acts only on the complement of span{v, w}: saturation survives
            let mut diag = vec![0.0; dim];
            diag[2..].iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
            HermitianOperator::diag(&diag).map_err(err)?
        } else {
            random_direction(&mut rng, dim)
        };
        cases.push((pair, base.add(&kick.scale_shift(eps, 0.0)).map_err(err)?));
    }

    let mut disagreements = 0;
    let mut saturated = 0;
    for (pair, a) in &cases {
        let report = check_saturation(a, pair, SATURATION).map_err(err)?;
        let reaches = (delta_of(a, pair).map_err(err)? - pair.theta().tan()).abs() <= DELTA_MATCH;
        saturated += usize::from(reaches);
        if report.saturated != reaches {
            disagreements += 1;
        }
    }
    let msg = format!("{} cases ({saturated} at the bound), {disagreements} disagreements", cases.len());
    if disagreements == 0 { Ok(msg) } else { Err(msg) }
}

fn optimizer_recovers_max() -> Verdict {
    let config = SearchConfig::default();
    let mut worst_gap: f64 = 0.0;
    let mut worst_excess = f64::NEG_INFINITY;
    for theta in linspace(0.05, 1.52, 15) {
        let pair = StatePair::from_angle(theta, 2).map_err(|e| e.to_string())?;
        for dim in [2, 3] {
            let r = maximize_delta(&pair, dim, &config).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max(theta.tan() - r.best_value);
            worst_excess = worst_excess.max(r.best_value - theta.tan());
        }
    }
    let msg = format!(
        "30 searches, max shortfall = {worst_gap:.2e} (tol 1e-4), max excess = {worst_excess:.2e} (tol 1e-9)"
    );
    if worst_gap <= 1e-4 && worst_excess <= 1e-9 { Ok(msg) } else { Err(msg) }
}

fn detection_cross_check() -> Verdict {
    let mut worst: f64 = 0.0;
    for theta in linspace(0.1, 1.5, 10) {
        let pair = StatePair::from_angle(theta, 2).map_err(|e| e.to_string())?;
        for p1 in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let found = maximize_detection(&pair, p1, 64).map_err(|e| e.to_string())?;
            let exact = min_error_prob(theta, p1).map_err(|e| e.to_string())?;
            worst = worst.max((found - exact).abs());
        }
    }
    let mut worst_simple: f64 = 0.0;
    for theta in linspace(0.1, 1.5, 15) {
        let pair = StatePair::from_angle(theta, 2).map_err(|e| e.to_string())?;
        let a = simple_optimal(&pair);
        let outcomes = eigendecompose(&a)
            .eigenvalues
            .iter()
            .map(|&x| (x, if x > 0.0 { Outcome::Second } else { Outcome::First }))
            .collect::<Vec<_>>();
        let p = detection_prob(&a, &pair, 0.5, &outcomes).map_err(|e| e.to_string())?;
        worst_simple = worst_simple.max((p - 0.5 * (1.0 + theta.sin())).abs());
    }
    let msg = format!(
        "50-point grid max error = {worst:.2e} (tol 1e-4); two-projector observable max error = {worst_simple:.2e} (tol 1e-10)"
    );
    if worst <= 1e-4 && worst_simple <= 1e-10 { Ok(msg) } else { Err(msg) }
}

fn chebyshev_exact() -> Verdict {
    let battery: Vec<(Vec<f64>, Vec<f64>)> = vec![
        (vec![-1.0, 1.0], vec![0.5, 0.5]),
        (vec![-1.0, 0.0, 1.0], vec![0.25, 0.5, 0.25]),
        (vec![0.0, 1.0], vec![0.9, 0.1]),
        (vec![0.0, 1.0, 10.0], vec![0.6, 0.35, 0.05]),
        (vec![-2.0, -0.5, 0.5, 3.0], vec![0.1, 0.4, 0.3, 0.2]),
        ((0..8).map(f64::from).collect(), vec![0.125; 8]),
        (vec![-3.0, -1.0, 0.0, 0.2, 0.7, 1.5, 2.0, 4.0], vec![0.05, 0.1, 0.2, 0.15, 0.2, 0.1, 0.15, 0.05]),
        (vec![5.0], vec![1.0]),
    ];
    let mut checked = 0;
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for (values, probs) in battery {
        let dist = OutcomeDistribution::new(values, probs).map_err(|e| e.to_string())?;
        let sigma = dist.std_dev();
        for n in 1..=6u32 {
            for t in [0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0].iter().copied().chain([sigma, sigma * 2.0]) {
                if t <= 0.0 {
                    continue;
                }
                let tail = exact_tail(&dist, t, n).map_err(|e| e.to_string())?;
                let bound = dist.variance / (n as f64 * t * t);
                checked += 1;
                if tail > bound {
                    violations += 1;
                }
                tightest = tightest.min(bound - tail);
            }
        }
    }
    let msg = format!("{checked} (distribution, t, n) cases, {violations} violations, min slack = {tightest:.3e}");
    if violations == 0 { Ok(msg) } else { Err(msg) }
}

fn monte_carlo_bound() -> Verdict {
    let pair = StatePair::from_angle(FRAC_PI_4, 2).map_err(|e| e.to_string())?;
    let a = saturating_observable(&pair, FRAC_PI_2, 1.0, 0.0).map_err(|e| e.to_string())?;
    let mut within = true;
    let mut rates = Vec::new();
    let mut parts = Vec::new();
    for n in [10u64, 100, 1000] {
        let r = run_experiment(&a, &pair, 0.5, n, 100_000, 2024).map_err(|e| e.to_string())?;
        within &= !r.violates_bound(3.0);
        rates.push(r.empirical_error);
        parts.push(format!("n={n}: {}/{} errors, bound {:.3e}", r.errors, r.trials, r.cheb_bound));
    }
    let decreasing = rates.windows(2).all(|w| w[1] < w[0]);
    let msg = format!(
        "{}; within bound+3SE: {within}; strictly decreasing: {decreasing}",
        parts.join(", ")
    );
    if within && decreasing { Ok(msg) } else { Err(msg) }
}

fn unambiguous_branches() -> Verdict {
    let balanced = unambiguous_optimum(0.5, 0.5).map_err(|e| e.to_string())?;
    let dominant = unambiguous_optimum(0.5, 0.9).map_err(|e| e.to_string())?;
    let msg = format!(
        "p1=0.5 -> {} ({:?}), p1=0.9 -> {} ({:?})",
        balanced.value, balanced.regime, dominant.value, dominant.regime
    );
    let ok = balanced.value == 0.5
        && balanced.regime == UnambiguousRegime::Balanced
        && dominant.value == 0.675
        && dominant.regime == UnambiguousRegime::Dominant;
    if ok { Ok(msg) } else { Err(msg) }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("saturating family reaches tan(theta)", saturating_family_reaches_bound),
        ("master inequality never violated", qmie_never_violated),
        ("saturation conditions <=> bound reached", saturation_equivalence),
        ("optimizer recovers the maximum", optimizer_recovers_max),
        ("single-shot detection cross-check", detection_cross_check),
        ("Chebyshev bound exact on small instances", chebyshev_exact),
        ("Monte Carlo error under 1/(n delta^2)", monte_carlo_bound),
        ("unambiguous discrimination branches", unambiguous_branches),
    ];
    let mut out = std::io::stdout().lock();
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        failures += usize::from(verdict.is_err());
        writeln!(out, "criterion {} [{tag}] {name}: {detail} ({secs:.1}s)", i + 1).unwrap();
    }
    writeln!(out, "acceptance: {} passed, {failures} failed", criteria.len() - failures).unwrap();
    if failures > 0 {
        std::process::exit(1);
    }
}
