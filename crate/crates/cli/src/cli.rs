use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Format;

#[derive(Parser, Debug)]
#[command(name = "discern", version, about = "Discriminate two pure quantum states from n-sample means")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Discernability of an observable for two states, against tan(theta).
    Delta(ProblemCmd),
    /// The upper bound tan(theta) for a pair of states.
    Bound(ProblemCmd),
    /// Build a member of the family of observables that reach tan(theta).
    Saturate(ProblemCmd),
    /// Master-inequality gap and the two saturation conditions.
    Check(ProblemCmd),
    /// Monte Carlo error rate of the threshold rule.
    Simulate(SimulateCmd),
    /// Simulate over a grid of theta, alpha and n.
    Sweep(SweepCmd),
    /// Numerical search for the observable with the largest discernability.
    Maximize(MaximizeCmd),
    /// Minimum-error and unambiguous discrimination optima.
    Reference(ReferenceCmd),
    /// Re-run the configuration echoed in an earlier output file.
    Rerun(RerunCmd),
}

#[derive(Args, Debug, Clone, Default)]
pub struct ProblemArgs {
    /// JSON file with any of `states`, `observable`, `priors`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Angle between the states; v = e0 and w = cos(theta) e0 + sin(theta) e1.
    #[arg(long, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    /// Rotation angle of the saturating family, in [theta, pi - theta].
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Scale of the family member.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Shift of the family member.
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    /// Hilbert-space dimension for generated states.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Accept alpha outside [theta, pi - theta].
    #[arg(long)]
    pub allow_unsaturated: bool,
    /// Read angles in degrees.
    #[arg(long)]
    pub degrees: bool,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ToleranceArgs {
    #[arg(long)]
    pub tol_unit: Option<f64>,
    #[arg(long)]
    pub tol_hermitian: Option<f64>,
    #[arg(long)]
    pub tol_saturation: Option<f64>,
    #[arg(long)]
    pub tol_qmie: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// Write here instead of stdout. Relative paths resolve against $DISCERN_OUTPUT_DIR when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct ProblemCmd {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    /// Prior probability of the first state.
    #[arg(long)]
    pub p1: Option<f64>,
    /// Samples per trial.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepCmd {
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true, allow_negative_numbers = true)]
    pub theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true, conflicts_with = "alpha_span")]
    pub alpha: Vec<f64>,
    /// Use this many evenly spaced alpha values across [theta, pi - theta].
    #[arg(long)]
    pub alpha_span: Option<usize>,
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true,
          value_parser = clap::value_parser!(u64).range(1..))]
    pub n: Vec<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub p1: Option<f64>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub allow_unsaturated: bool,
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct MaximizeCmd {
    /// JSON file supplying `states`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<f64>,
    /// Dimension of the operator search space.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Objective evaluations per restart.
    #[arg(long)]
    pub max_evals: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ReferenceCmd {
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub theta: Vec<f64>,
    /// Overlaps |<v,w>| = cos(theta), as an alternative to --theta.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub cos_theta: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub p1: Vec<f64>,
    #[arg(long)]
    pub degrees: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct RerunCmd {
    /// JSON or CSV output of an earlier run.
    pub file: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}
