//! Fully resolved run configuration. Every output echoes it, and `rerun`
//! executes an echoed copy.

use std::path::PathBuf;

use clap::ValueEnum;
use discern_core::{SearchConfig, Tolerances};
use serde::{Deserialize, Serialize};

use crate::cli::{Command, MaximizeCmd, OutputArgs, ProblemArgs, ReferenceCmd, SimulateCmd, SweepCmd, ToleranceArgs};
use crate::failure::{CliResult, Failure};
use crate::input::{self, ProblemInput, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Delta,
    Bound,
    Saturate,
    Check,
    Simulate,
    Sweep,
    Maximize,
    Reference,
}

impl CommandKind {
    fn default_format(self) -> Format {
        match self {
            CommandKind::Sweep | CommandKind::Reference => Format::Csv,
            _ => Format::Json,
        }
    }

    fn supports_csv(self) -> bool {
        matches!(self, CommandKind::Simulate | CommandKind::Sweep | CommandKind::Reference)
    }
}

/// Parameters in radians with defaults filled in. Fields a command does not
/// use stay `None` and are omitted from the echo.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_unsaturated: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub thetas: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cos_thetas: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_span: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ns: Vec<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub p1s: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_path: Option<PathBuf>,
    /// Contents of the input file, so the echo does not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<ProblemInput>,
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    /// Checks that hold for configs from flags and from echoes alike.
    pub fn validate(&self) -> CliResult<()> {
        if self.format == Format::Csv && !self.command.supports_csv() {
            return Err(Failure::Usage(format!("{:?} output is JSON only", self.command).to_lowercase()));
        }
        if let Some(input) = &self.input {
            input::validate(input)?;
        }
        let p = &self.params;
        if let Some(dim) = p.dim {
            if !(2..=MAX_DIM).contains(&dim) {
                return Err(Failure::Usage(format!("--dim {dim} outside [2, {MAX_DIM}]")));
            }
        }
        for p1 in p.p1.iter().chain(&p.p1s) {
            if !(*p1 > 0.0 && *p1 < 1.0) {
                return Err(Failure::Usage(format!("p1 = {p1} outside (0, 1)")));
            }
        }
        if p.n == Some(0) || p.trials == Some(0) || p.ns.contains(&0) {
            return Err(Failure::Usage("n and trials must be positive".into()));
        }
        if let Some(t) = p.tolerances {
            let all = [t.unit_norm, t.hermitian, t.eigen_merge, t.saturation, t.qmie];
            if all.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Failure::Usage("tolerances must be finite and non-negative".into()));
            }
        }
        if p.lambda == Some(0.0) {
            return Err(Failure::Usage("--lambda must be nonzero".into()));
        }
        Ok(())
    }
}

fn angle(x: Option<f64>, degrees: bool) -> Option<f64> {
    x.map(|v| if degrees { v.to_radians() } else { v })
}

fn angles(xs: &[f64], degrees: bool) -> Vec<f64> {
    xs.iter().map(|&v| if degrees { v.to_radians() } else { v }).collect()
}

fn tolerances(t: &ToleranceArgs) -> Tolerances {
    let d = Tolerances::default();
    Tolerances {
        unit_norm: t.tol_unit.unwrap_or(d.unit_norm),
        hermitian: t.tol_hermitian.unwrap_or(d.hermitian),
        eigen_merge: d.eigen_merge,
        saturation: t.tol_saturation.unwrap_or(d.saturation),
        qmie: t.tol_qmie.unwrap_or(d.qmie),
    }
}

fn load_input(path: &Option<PathBuf>) -> CliResult<Option<ProblemInput>> {
    path.as_deref().map(input::load).transpose()
}

fn problem_params(p: &ProblemArgs, input: Option<&ProblemInput>) -> CliResult<Params> {
    let has_states = input.is_some_and(|i| i.states.is_some());
    let has_observable = input.is_some_and(|i| i.observable.is_some());
    if has_states && p.theta.is_some() {
        return Err(Failure::Usage("--theta conflicts with states given in --input".into()));
    }
    if has_states && p.dim.is_some() {
        return Err(Failure::Usage("--dim conflicts with states given in --input".into()));
    }
    if has_observable && (p.alpha.is_some() || p.lambda.is_some() || p.mu.is_some()) {
        return Err(Failure::Usage("--alpha/--lambda/--mu conflict with the observable in --input".into()));
    }
    let family = p.alpha.is_some();
    Ok(Params {
        theta: angle(p.theta, p.degrees),
        dim: if has_states { None } else { Some(p.dim.unwrap_or(2)) },
        alpha: angle(p.alpha, p.degrees),
        lambda: family.then(|| p.lambda.unwrap_or(1.0)),
        mu: family.then(|| p.mu.unwrap_or(0.0)),
        allow_unsaturated: family.then_some(p.allow_unsaturated),
        ..Params::default()
    })
}

fn format_for(kind: CommandKind, out: &OutputArgs) -> Format {
    out.format.unwrap_or(kind.default_format())
}

fn from_problem(kind: CommandKind, cmd: &crate::cli::ProblemCmd) -> CliResult<RunConfig> {
    let input = load_input(&cmd.problem.input)?;
    let mut params = problem_params(&cmd.problem, input.as_ref())?;
    if kind != CommandKind::Bound {
        params.tolerances = Some(tolerances(&cmd.tolerances));
    }
    if kind == CommandKind::Bound {
        for (flag, set) in [("--alpha", cmd.problem.alpha.is_some()), ("--lambda", cmd.problem.lambda.is_some())] {
            if set {
                return Err(Failure::Usage(format!("{flag} has no effect on `bound`")));
            }
        }
    }
    Ok(RunConfig {
        command: kind,
        input_path: cmd.problem.input.clone(),
        input,
        params,
        output_path: cmd.output.output.clone(),
        format: format_for(kind, &cmd.output),
    })
}

fn from_simulate(cmd: &SimulateCmd) -> CliResult<RunConfig> {
    let input = load_input(&cmd.problem.input)?;
    let mut params = problem_params(&cmd.problem, input.as_ref())?;
    let input_p1 = input.as_ref().and_then(|i| i.priors).map(|p| p.p1);
    if input_p1.is_some() && cmd.p1.is_some() {
        return Err(Failure::Usage("--p1 conflicts with priors given in --input".into()));
    }
    params.p1 = if input_p1.is_some() { None } else { Some(cmd.p1.unwrap_or(0.5)) };
    params.n = Some(cmd.n);
    params.trials = Some(cmd.trials.unwrap_or(10_000));
    params.seed = Some(cmd.seed.unwrap_or(0));
    params.tolerances = Some(tolerances(&cmd.tolerances));
    Ok(RunConfig {
        command: CommandKind::Simulate,
        input_path: cmd.problem.input.clone(),
        input,
        params,
        output_path: cmd.output.output.clone(),
        format: format_for(CommandKind::Simulate, &cmd.output),
    })
}

fn from_sweep(cmd: &SweepCmd) -> CliResult<RunConfig> {
    if cmd.alpha.is_empty() && cmd.alpha_span.is_none() {
        return Err(Failure::Usage("sweep needs --alpha or --alpha-span".into()));
    }
    let params = Params {
        thetas: angles(&cmd.theta, cmd.degrees),
        alphas: angles(&cmd.alpha, cmd.degrees),
        alpha_span: cmd.alpha_span,
        ns: cmd.n.clone(),
        lambda: Some(cmd.lambda.unwrap_or(1.0)),
        mu: Some(cmd.mu.unwrap_or(0.0)),
        dim: Some(cmd.dim.unwrap_or(2)),
        p1: Some(cmd.p1.unwrap_or(0.5)),
        trials: Some(cmd.trials.unwrap_or(10_000)),
        seed: Some(cmd.seed.unwrap_or(0)),
        allow_unsaturated: Some(cmd.allow_unsaturated),
        ..Params::default()
    };
    Ok(RunConfig {
        command: CommandKind::Sweep,
        input_path: None,
        input: None,
        params,
        output_path: cmd.output.output.clone(),
        format: format_for(CommandKind::Sweep, &cmd.output),
    })
}

fn from_maximize(cmd: &MaximizeCmd) -> CliResult<RunConfig> {
    let input = load_input(&cmd.input)?;
    if let Some(i) = &input {
        if i.observable.is_some() || i.priors.is_some() {
            return Err(Failure::Usage("maximize reads only `states` from --input".into()));
        }
    }
    let has_states = input.as_ref().is_some_and(|i| i.states.is_some());
    if has_states && cmd.theta.is_some() {
        return Err(Failure::Usage("--theta conflicts with states given in --input".into()));
    }
    let defaults = SearchConfig::default();
    let search = SearchConfig {
        restarts: cmd.restarts.unwrap_or(defaults.restarts),
        max_evals: cmd.max_evals.unwrap_or(defaults.max_evals),
        seed: cmd.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let params = Params {
        theta: angle(cmd.theta, cmd.degrees),
        dim: cmd.dim.or(Some(2)),
        search: Some(search),
        tolerances: Some(tolerances(&cmd.tolerances)),
        ..Params::default()
    };
    Ok(RunConfig {
        command: CommandKind::Maximize,
        input_path: cmd.input.clone(),
        input,
        params,
        output_path: cmd.output.output.clone(),
        format: format_for(CommandKind::Maximize, &cmd.output),
    })
}

fn from_reference(cmd: &ReferenceCmd) -> CliResult<RunConfig> {
    if cmd.theta.is_empty() && cmd.cos_theta.is_empty() {
        return Err(Failure::Usage("reference needs --theta or --cos-theta".into()));
    }
    let params = Params {
        thetas: angles(&cmd.theta, cmd.degrees),
        cos_thetas: cmd.cos_theta.clone(),
        p1s: if cmd.p1.is_empty() { vec![0.5] } else { cmd.p1.clone() },
        ..Params::default()
    };
    Ok(RunConfig {
        command: CommandKind::Reference,
        input_path: None,
        input: None,
        params,
        output_path: cmd.output.output.clone(),
        format: format_for(CommandKind::Reference, &cmd.output),
    })
}

/// Resolves parsed flags into a config. `rerun` is handled by the caller.
pub fn from_command(command: &Command) -> CliResult<RunConfig> {
    let config = match command {
        Command::Delta(c) => from_problem(CommandKind::Delta, c)?,
        Command::Bound(c) => from_problem(CommandKind::Bound, c)?,
        Command::Saturate(c) => from_problem(CommandKind::Saturate, c)?,
        Command::Check(c) => from_problem(CommandKind::Check, c)?,
        Command::Simulate(c) => from_simulate(c)?,
        Command::Sweep(c) => from_sweep(c)?,
        Command::Maximize(c) => from_maximize(c)?,
        Command::Reference(c) => from_reference(c)?,
        Command::Rerun(_) => unreachable!("rerun loads its config from a file"),
    };
    config.validate()?;
    Ok(config)
}
