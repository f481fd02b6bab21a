use std::f64::consts::{FRAC_PI_2, PI};

use discern_core::discrimination::{overlap_of_angle, saturating_range};
use discern_core::linalg::eigendecompose_with;
use discern_core::*;
use serde::Serialize;

use crate::config::{CommandKind, RunConfig};
use crate::failure::{CliResult, Failure};
use crate::input::Entries;
use crate::output::{num, Table};

/// Result of one command before rendering.
pub struct Report {
    pub json: serde_json::Value,
    pub table: Option<Table>,
    /// Human-readable line for stderr.
    pub summary: String,
    /// Set when the output is written but the run must exit non-zero.
    pub status: Option<Failure>,
}

impl Report {
    fn new<T: Serialize>(result: &T, summary: String) -> CliResult<Self> {
        let json = serde_json::to_value(result).map_err(|e| Failure::Invariant(e.to_string()))?;
        Ok(Self { json, table: None, summary, status: None })
    }
}

/// Seven significant digits for summaries.
fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.6e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

fn tolerances(cfg: &RunConfig) -> Tolerances {
    cfg.params.tolerances.unwrap_or_default()
}

fn unit_state(entries: &Entries, name: &str, tol: f64) -> CliResult<ComplexVector> {
    let v = ComplexVector::try_from(entries.clone())?;
    let dev = v.unit_deviation();
    if dev.is_nan() || dev > tol {
        return Err(Failure::Input(format!("states.{name} is not a unit vector (|<{name},{name}> - 1| = {dev:e})")));
    }
    Ok(v.normalized()?)
}

fn state_pair(cfg: &RunConfig) -> CliResult<StatePair> {
    let tol = tolerances(cfg);
    if let Some(states) = cfg.input.as_ref().and_then(|i| i.states.as_ref()) {
        let v = unit_state(&states.v, "v", tol.unit_norm)?;
        let w = unit_state(&states.w, "w", tol.unit_norm)?;
        return Ok(make_state_pair(v, w)?);
    }
    match cfg.params.theta {
        Some(theta) => Ok(StatePair::from_angle(theta, cfg.params.dim.unwrap_or(2))?),
        None => Err(Failure::Usage("supply --theta or states in --input".into())),
    }
}

struct Observable {
    op: HermitianOperator,
    /// Whether `alpha` lies in the saturating range; `None` for observables read from input.
    in_range: Option<bool>,
}

fn family_member(pair: &StatePair, alpha: f64, lambda: f64, mu: f64, allow_unsaturated: bool) -> CliResult<Observable> {
    let (lo, hi) = saturating_range(pair);
    let in_range = alpha >= lo - 1e-12 && alpha <= hi + 1e-12;
    let op = if in_range || !allow_unsaturated {
        saturating_observable(pair, alpha, lambda, mu)?
    } else {
        rotated_observable(pair, alpha).scale_shift(lambda, mu)
    };
    Ok(Observable { op, in_range: Some(in_range) })
}

fn observable(cfg: &RunConfig, pair: &StatePair) -> CliResult<Observable> {
    if let Some(rows) = cfg.input.as_ref().and_then(|i| i.observable.as_ref()) {
        let rows = rows.iter().map(|r| r.iter().map(|p| Complex64::new(p[0], p[1])).collect()).collect();
        let op = HermitianOperator::from_rows_with_tolerance(rows, tolerances(cfg).hermitian)?;
        if op.dim() != pair.dim() {
            return Err(Failure::Input(format!("observable dimension {} != state dimension {}", op.dim(), pair.dim())));
        }
        return Ok(Observable { op, in_range: None });
    }
    let p = &cfg.params;
    match p.alpha {
        Some(alpha) => family_member(
            pair,
            alpha,
            p.lambda.unwrap_or(1.0),
            p.mu.unwrap_or(0.0),
            p.allow_unsaturated.unwrap_or(false),
        ),
        None => Err(Failure::Usage("supply --alpha or an observable in --input".into())),
    }
}

fn bound_of(pair: &StatePair) -> f64 {
    if pair.is_orthogonal() {
        f64::INFINITY
    } else {
        pair.theta().tan()
    }
}

fn qmie_status(gap: f64, a: &HermitianOperator, tol: f64) -> Option<Failure> {
    let floor = -tol * a.frobenius_norm().max(1.0);
    (gap < floor).then(|| Failure::Invariant(format!("master-inequality gap {gap:e} below {floor:e}")))
}

#[derive(Serialize)]
struct DeltaOut {
    theta: f64,
    dim: usize,
    #[serde(flatten)]
    stats: DiscriminationStats,
    bound: f64,
    bound_gap: Option<f64>,
    qmie_gap: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_in_saturating_range: Option<bool>,
    spectrum: Vec<f64>,
}

fn delta(cfg: &RunConfig) -> CliResult<Report> {
    let pair = state_pair(cfg)?;
    let obs = observable(cfg, &pair)?;
    let a = &obs.op;
    let stats = discernability(a, &pair)?;
    let bound = bound_of(&pair);
    let bound_gap = stats.delta.value().filter(|d| d.is_finite() && bound.is_finite()).map(|d| bound - d);
    let gap = qmie_gap(a, pair.v(), pair.w())?;
    let out = DeltaOut {
        theta: pair.theta(),
        dim: pair.dim(),
        stats,
        bound,
        bound_gap,
        qmie_gap: gap,
        alpha_in_saturating_range: obs.in_range,
        spectrum: eigendecompose_with(a, tolerances(cfg).eigen_merge).eigenvalues,
    };
    let summary = match stats.delta {
        Discernability::Defined(d) => {
            format!("delta = {}, tan(theta) = {}, gap = {}", sig(d), sig(bound), sig(bound - d))
        }
        Discernability::Infinite => "delta = inf (orthogonal eigenstates)".to_string(),
        Discernability::Undefined => "delta undefined".to_string(),
    };
    let mut report = Report::new(&out, summary)?;
    report.status = if stats.delta == Discernability::Undefined {
        Some(Failure::Input("discernability undefined: both states are eigenvectors for one eigenvalue".into()))
    } else {
        qmie_status(gap, a, tolerances(cfg).qmie)
    };
    Ok(report)
}

#[derive(Serialize)]
struct BoundOut {
    theta: f64,
    overlap: f64,
    dim: usize,
    orthogonal: bool,
    /// `null` for orthogonal states.
    bound: Option<f64>,
}

fn bound(cfg: &RunConfig) -> CliResult<Report> {
    let pair = state_pair(cfg)?;
    let bound = (!pair.is_orthogonal()).then(|| pair.theta().tan());
    let out = BoundOut { theta: pair.theta(), overlap: pair.overlap(), dim: pair.dim(), orthogonal: pair.is_orthogonal(), bound };
    let summary = match bound {
        Some(b) => format!("theta = {}, tan(theta) = {}", sig(pair.theta()), sig(b)),
        None => "orthogonal states: unbounded".to_string(),
    };
    Report::new(&out, summary)
}

#[derive(Serialize)]
struct SaturateOut {
    theta: f64,
    alpha: f64,
    lambda: f64,
    mu: f64,
    saturating_range: [f64; 2],
    in_range: bool,
    observable: HermitianOperator,
    delta: Discernability,
    bound: f64,
}

fn saturate(cfg: &RunConfig) -> CliResult<Report> {
    if cfg.input.as_ref().is_some_and(|i| i.observable.is_some()) {
        return Err(Failure::Usage("saturate builds the observable from --alpha; drop `observable` from the input".into()));
    }
    let pair = state_pair(cfg)?;
    let obs = observable(cfg, &pair)?;
    let stats = discernability(&obs.op, &pair)?;
    let (lo, hi) = saturating_range(&pair);
    let out = SaturateOut {
        theta: pair.theta(),
        alpha: cfg.params.alpha.unwrap_or(FRAC_PI_2),
        lambda: cfg.params.lambda.unwrap_or(1.0),
        mu: cfg.params.mu.unwrap_or(0.0),
        saturating_range: [lo, hi],
        in_range: obs.in_range.unwrap_or(true),
        observable: obs.op,
        delta: stats.delta,
        bound: bound_of(&pair),
    };
    let summary = match stats.delta.value() {
        Some(d) => format!("delta = {}, tan(theta) = {}", sig(d), sig(out.bound)),
        None => "delta undefined".to_string(),
    };
    Report::new(&out, summary)
}

#[derive(Serialize)]
struct CheckOut {
    theta: f64,
    qmie_gap: f64,
    saturation: SaturationReport,
}

fn check(cfg: &RunConfig) -> CliResult<Report> {
    let pair = state_pair(cfg)?;
    let obs = observable(cfg, &pair)?;
    let tol = tolerances(cfg);
    let gap = qmie_gap(&obs.op, pair.v(), pair.w())?;
    let saturation = check_saturation(&obs.op, &pair, tol.saturation)?;
    let summary = format!(
        "gap = {}, stabilizes span = {}, lambda in hull = {}, saturated = {}",
        sig(gap),
        saturation.stabilizes_subspace,
        saturation.lambda_in_hull,
        saturation.saturated
    );
    let mut report = Report::new(&CheckOut { theta: pair.theta(), qmie_gap: gap, saturation }, summary)?;
    report.status = qmie_status(gap, &obs.op, tol.qmie);
    Ok(report)
}

const TRIAL_COLUMNS: [&str; 8] = ["theta", "alpha", "n", "trials", "empirical_error", "cheb_bound", "delta", "seed"];

fn trial_row(theta: f64, alpha: Option<f64>, r: &TrialReport) -> Vec<String> {
    vec![
        num(theta),
        alpha.map(num).unwrap_or_default(),
        r.n.to_string(),
        r.trials.to_string(),
        num(r.empirical_error),
        num(r.cheb_bound),
        num(r.delta),
        r.seed.to_string(),
    ]
}

fn bound_status(r: &TrialReport) -> Option<Failure> {
    r.violates_bound(3.0).then(|| {
        Failure::Invariant(format!(
            "error rate {} exceeds 1/(n delta^2) = {} by more than 3 standard errors (n = {})",
            r.empirical_error, r.cheb_bound, r.n
        ))
    })
}

#[derive(Serialize)]
struct SimulateOut {
    theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(flatten)]
    report: TrialReport,
}

fn simulate(cfg: &RunConfig) -> CliResult<Report> {
    let pair = state_pair(cfg)?;
    let obs = observable(cfg, &pair)?;
    let p = &cfg.params;
    let p1 = cfg.input.as_ref().and_then(|i| i.priors).map(|pr| pr.p1).or(p.p1).unwrap_or(0.5);
    let (n, trials, seed) = (p.n.unwrap_or(1), p.trials.unwrap_or(10_000), p.seed.unwrap_or(0));
    let r = run_experiment(&obs.op, &pair, p1, n, trials, seed)?;
    let alpha = if obs.in_range.is_some() { p.alpha } else { None };
    let summary = format!(
        "n = {n}: {} errors in {trials} trials (rate {}), bound 1/(n delta^2) = {}",
        r.errors,
        sig(r.empirical_error),
        sig(r.cheb_bound)
    );
    let table = Table { header: TRIAL_COLUMNS.to_vec(), rows: vec![trial_row(pair.theta(), alpha, &r)] };
    let status = bound_status(&r);
    let mut report = Report::new(&SimulateOut { theta: pair.theta(), alpha, report: r }, summary)?;
    report.table = Some(table);
    report.status = status;
    Ok(report)
}

fn sorted<T: PartialOrd + Copy>(xs: &[T]) -> Vec<T> {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    v
}

fn alpha_grid(theta: f64, alphas: &[f64], span: Option<usize>) -> Vec<f64> {
    match span {
        None => sorted(alphas),
        Some(0) => Vec::new(),
        Some(1) => vec![FRAC_PI_2],
        Some(k) => (0..k).map(|i| theta + (PI - 2.0 * theta) * i as f64 / (k - 1) as f64).collect(),
    }
}

#[derive(Serialize)]
struct SweepRow {
    theta: f64,
    alpha: f64,
    #[serde(flatten)]
    report: TrialReport,
}

fn sweep(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    if p.thetas.iter().chain(&p.alphas).any(|x| !x.is_finite()) {
        return Err(Failure::Input("grid values must be finite".into()));
    }
    let (lambda, mu, dim) = (p.lambda.unwrap_or(1.0), p.mu.unwrap_or(0.0), p.dim.unwrap_or(2));
    let (p1, trials, seed) = (p.p1.unwrap_or(0.5), p.trials.unwrap_or(10_000), p.seed.unwrap_or(0));
    let ns = sorted(&p.ns);
    let mut rows = Vec::new();
    let mut table = Table { header: TRIAL_COLUMNS.to_vec(), rows: Vec::new() };
    let mut status = None;
    for theta in sorted(&p.thetas) {
        let pair = StatePair::from_angle(theta, dim)?;
        for alpha in alpha_grid(theta, &p.alphas, p.alpha_span) {
            let obs = family_member(&pair, alpha, lambda, mu, p.allow_unsaturated.unwrap_or(false))?;
            for &n in &ns {
                let r = run_experiment(&obs.op, &pair, p1, n, trials, seed)?;
                status = status.or_else(|| bound_status(&r));
                table.rows.push(trial_row(theta, Some(alpha), &r));
                rows.push(SweepRow { theta, alpha, report: r });
            }
        }
    }
    if rows.is_empty() {
        return Err(Failure::Input("empty grid".into()));
    }
    let summary = format!("{} grid points", rows.len());
    let mut report = Report::new(&serde_json::json!({ "rows": rows }), summary)?;
    report.table = Some(table);
    report.status = status;
    Ok(report)
}

#[derive(Serialize)]
struct MaximizeOut {
    theta: f64,
    dim: usize,
    bound: f64,
    shortfall: f64,
    subspace_residual: f64,
    #[serde(flatten)]
    result: SearchResult,
}

fn maximize(cfg: &RunConfig) -> CliResult<Report> {
    let pair = state_pair(cfg)?;
    let dim = cfg.params.dim.unwrap_or(pair.dim()).max(pair.dim());
    let search = cfg.params.search.clone().unwrap_or_default();
    let result = maximize_delta(&pair, dim, &search)?;
    let embedded = pair.embed(dim)?;
    let saturation = check_saturation(&result.best_operator, &embedded, tolerances(cfg).saturation)?;
    let summary = format!(
        "best delta = {} vs tan(theta) = {} (shortfall {:.1e}), subspace residual {:.1e}, converged = {}",
        sig(result.best_value),
        sig(result.bound),
        result.bound - result.best_value,
        saturation.subspace_residual,
        result.converged
    );
    let out = MaximizeOut {
        theta: pair.theta(),
        dim,
        bound: result.bound,
        shortfall: result.bound - result.best_value,
        subspace_residual: saturation.subspace_residual,
        result,
    };
    Report::new(&out, summary)
}

#[derive(Serialize)]
struct ReferenceRow {
    theta: f64,
    cos_theta: f64,
    p1: f64,
    min_error_prob: f64,
    unambiguous_max: f64,
    /// 1 when both priors contribute, 2 when only the likelier state is ever identified.
    regime: u8,
}

fn reference(cfg: &RunConfig) -> CliResult<Report> {
    let p = &cfg.params;
    let points = p
        .thetas
        .iter()
        .map(|&t| (t, overlap_of_angle(t)))
        .chain(p.cos_thetas.iter().map(|&c| (c.clamp(-1.0, 1.0).acos(), c)));
    let mut rows = Vec::new();
    for (theta, cos_theta) in points {
        for &p1 in &p.p1s {
            let u = unambiguous_optimum(cos_theta, p1)?;
            rows.push(ReferenceRow {
                theta,
                cos_theta,
                p1,
                min_error_prob: min_error_prob(theta, p1)?,
                unambiguous_max: u.value,
                regime: match u.regime {
                    UnambiguousRegime::Balanced => 1,
                    UnambiguousRegime::Dominant => 2,
                },
            });
        }
    }
    let table = Table {
        header: vec!["theta", "cos_theta", "p1", "min_error_prob", "unambiguous_max", "regime"],
        rows: rows
            .iter()
            .map(|r| {
                vec![num(r.theta), num(r.cos_theta), num(r.p1), num(r.min_error_prob), num(r.unambiguous_max), r.regime.to_string()]
            })
            .collect(),
    };
    let summary = rows
        .iter()
        .map(|r| {
            format!(
                "theta = {}, p1 = {}: min-error {}, unambiguous {} (regime {})",
                sig(r.theta),
                sig(r.p1),
                sig(r.min_error_prob),
                sig(r.unambiguous_max),
                r.regime
            )
        })
        .collect::<Vec<_>>()
        .join("\n");
    let mut report = Report::new(&serde_json::json!({ "rows": rows }), summary)?;
    report.table = Some(table);
    Ok(report)
}

pub fn execute(cfg: &RunConfig) -> CliResult<Report> {
    match cfg.command {
        CommandKind::Delta => delta(cfg),
        CommandKind::Bound => bound(cfg),
        CommandKind::Saturate => saturate(cfg),
        CommandKind::Check => check(cfg),
        CommandKind::Simulate => simulate(cfg),
        CommandKind::Sweep => sweep(cfg),
        CommandKind::Maximize => maximize(cfg),
        CommandKind::Reference => reference(cfg),
    }
}
