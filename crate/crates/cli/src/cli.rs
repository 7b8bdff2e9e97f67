use clap::{Args, Parser, Subcommand};

/// Entropic optimal transport on uniform grids.
///
/// Options can also come from a flat JSON file given with `--config`;
/// flags override file values, and reports record where each value came
/// from.
#[derive(Debug, Parser)]
#[command(name = "entropic-ot", version)]
pub struct Cli {
    /// Directory that relative output paths are resolved against.
    #[arg(long, global = true)]
    pub out_dir: Option<String>,
    /// Suppress progress output on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    /// Worker threads for sweeps (1 keeps runs bitwise reproducible).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Flat JSON object of option values.
    #[arg(long, global = true)]
    pub config: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one regularized problem and write report.json.
    Solve(SolveArgs),
    /// Solve one problem for a list of gamma values.
    SweepGamma(SweepGammaArgs),
    /// Smooth atomic marginals along a (gamma, delta) schedule and compare
    /// with the unregularized optimum.
    GammaLimit(GammaLimitArgs),
    /// Luxemburg norm of a sampled function.
    OrliczNorm(NormArgs),
    /// Neg-entropy of a sampled density.
    Entropy(EntropyArgs),
    /// Solve, then verify the optimality system and related bounds.
    CheckOptimality(SolveArgs),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// First marginal, CSV `x,density`.
    #[arg(long)]
    pub mu: Option<String>,
    /// Second marginal, CSV `x,density`.
    #[arg(long)]
    pub nu: Option<String>,
    /// sqdist, abs, power:P, zero or file:PATH (CSV `x,y,cost`). Default sqdist.
    #[arg(long)]
    pub cost: Option<String>,
}

#[derive(Debug, Args)]
pub struct OptsArgs {
    /// Stopping tolerance on the L1 marginal error. Default 1e-9.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Iteration budget. Default 100000.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// log or direct. Default log.
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Regularization strength.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[command(flatten)]
    pub opts: OptsArgs,
    /// Report path (report.json for solve, checks.json for check-optimality).
    #[arg(long)]
    pub out: Option<String>,
    /// Optional plan output, CSV `x,y,density`.
    #[arg(long)]
    pub plan: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepGammaArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Comma-separated gamma values.
    #[arg(long, allow_hyphen_values = true)]
    pub gammas: Option<String>,
    #[command(flatten)]
    pub opts: OptsArgs,
    /// Output CSV. Default sweep.csv.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct GammaLimitArgs {
    /// atoms:X:M,X:M,... or CSV `x,mass`.
    #[arg(long)]
    pub mu: Option<String>,
    /// atoms:X:M,X:M,... or CSV `x,mass`.
    #[arg(long)]
    pub nu: Option<String>,
    /// sqdist, abs or power:P. Default sqdist.
    #[arg(long)]
    pub cost: Option<String>,
    /// coupled:c=C:gammas=..., power:c=C:p=P:gammas=... or pairs:G/D,...
    #[arg(long)]
    pub schedule: Option<String>,
    /// Cells per original domain. Default 256.
    #[arg(long)]
    pub n: Option<usize>,
    /// LO:HI for both domains. Default 0:1.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
    /// LO:HI for the first domain only.
    #[arg(long, allow_hyphen_values = true)]
    pub domain1: Option<String>,
    /// LO:HI for the second domain only.
    #[arg(long, allow_hyphen_values = true)]
    pub domain2: Option<String>,
    #[command(flatten)]
    pub opts: OptsArgs,
    /// Output CSV. Default sweep.csv.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// log, exp or solver.
    #[arg(long)]
    pub young: Option<String>,
    /// CSV `x,value`.
    #[arg(long)]
    pub input: Option<String>,
    /// Relative bisection tolerance. Default 1e-10.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Optional JSON output.
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// CSV `x,density`.
    #[arg(long)]
    pub input: Option<String>,
    /// Optional JSON output.
    #[arg(long)]
    pub out: Option<String>,
}
