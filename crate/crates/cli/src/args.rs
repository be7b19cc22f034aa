//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "remest",
    version,
    about = "Optimal threshold policies for remote estimation: tables, trade-off curves, solvers, simulation and validation",
    after_help = "Arguments can be read from a file with @PATH, one argument per line."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, conflicts_with = "serial")]
    pub threads: Option<usize>,

    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    pub serial: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// D, N and corner prices of the birth-death chain for k = 0..k-max.
    Table(TableArgs),
    /// Optimal trade-off curve: exact corners (model A) or solved grid points (model B).
    Curve(CurveArgs),
    /// Optimal policy for one price or rate constraint.
    Solve(SolveArgs),
    /// Monte-Carlo estimates of distortion and transmission rate.
    Simulate(SimulateArgs),
    /// Run consistency checks; exits with status 3 if any fails.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Integer-valued birth-death innovations.
    #[value(name = "A", alias = "a")]
    A,
    /// Real-valued Gaussian innovations.
    #[value(name = "B", alias = "b")]
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Distortion {
    Abs,
    Quad,
}

/// Instance description shared by most commands.
#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    #[arg(long, value_enum, default_value_t = Model::A)]
    pub model: Model,

    /// Discount factor in (0, 1]; 1 selects long-run averages.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,

    /// Autoregression coefficient (integral for model A).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub a: f64,

    /// Birth-death step probability (model A).
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,

    /// Innovation standard deviation (model B).
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,

    /// Distortion function (default: abs for model A, quad for model B).
    #[arg(long, value_enum)]
    pub distortion: Option<Distortion>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Birth-death step probability in (0, 1/3).
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,

    /// Discount factors, comma separated.
    #[arg(long = "beta", value_delimiter = ',', default_values_t = [0.9, 0.95, 1.0])]
    pub betas: Vec<f64>,

    #[arg(long = "k-max", default_value_t = 10)]
    pub k_max: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Problem {
    /// Minimize D + lambda N.
    Costly,
    /// Minimize D subject to N <= alpha.
    Constrained,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub spec: SpecArgs,

    #[arg(long, value_enum)]
    pub kind: Problem,

    /// Largest threshold considered (model A).
    #[arg(long = "k-max", default_value_t = 10)]
    pub k_max: u32,

    /// Prices (costly) or rate constraints (constrained) to solve at (model B).
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<f64>,

    /// Bisection tolerance on lambda or N (model B).
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[arg(value_enum)]
    pub problem: Problem,

    #[command(flatten)]
    pub spec: SpecArgs,

    /// Communication price (costly problem).
    #[arg(long)]
    pub lambda: Option<f64>,

    /// Rate constraint (constrained problem).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Bisection tolerance on lambda or N (model B).
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    /// Transmit iff |e| >= k.
    Threshold,
    /// Optimal randomized threshold for --alpha (model A).
    Randomized,
    /// Periodic transmission at rate --alpha.
    Periodic,
    /// Independent coin with success probability --alpha.
    Iid,
    /// Deterministic frequency steering for --alpha (model A).
    Steering,
    /// Alternating threshold cycles for --alpha (model A).
    TimeSharing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// One transmission per period.
    OneInT,
    /// One silent step per period.
    AllButOne,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub spec: SpecArgs,

    #[arg(long, value_enum, default_value_t = PolicyKind::Threshold)]
    pub policy: PolicyKind,

    /// Threshold for --policy threshold ("inf" never transmits).
    #[arg(long)]
    pub k: Option<f64>,

    /// Target transmission rate for rate-driven policies.
    #[arg(long)]
    pub alpha: Option<f64>,

    #[arg(long, value_enum, default_value_t = Family::OneInT)]
    pub family: Family,

    /// Time-sharing schedule denominators are at most 10^depth.
    #[arg(long, default_value_t = 3)]
    pub depth: u32,

    #[command(flatten)]
    pub sim: SimArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Independent replications.
    #[arg(long, default_value_t = 200)]
    pub reps: u32,

    /// Averaged steps per replication (long-run average only).
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,

    /// Discarded initial steps (long-run average only).
    #[arg(long = "burn-in", default_value_t = 1_000)]
    pub burn_in: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Reference table cells and worked examples.
    #[value(name = "tableI", alias = "table")]
    TableI,
    /// Closed forms, first-threshold rate, corner continuity and curve shape.
    ClosedForms,
    /// Gauss-Markov scaling, monotonicity and bisection round trips.
    Scaling,
    /// Monte-Carlo against analytic performance.
    Renewal,
    /// Value iteration and policy-evaluation fixed points.
    Dp,
    /// Periodic, randomized, steering and time-sharing strategies.
    Baselines,
    All,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,

    /// Seed for the Monte-Carlo checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Replications for the Monte-Carlo checks.
    #[arg(long, default_value_t = 200)]
    pub reps: u32,

    /// Averaged steps per replication for the Monte-Carlo checks.
    #[arg(long, default_value_t = 100_000)]
    pub horizon: u64,
}
