//! Command-line flags.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "sosrate", version, about = "Worst-case contraction factors of first-order methods via sum-of-squares certificates")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Verb {
    /// Solve the SOS program and compare with the closed-form rate.
    Rate,
    /// Check the catalogued certificate in exact arithmetic.
    Verify,
    /// Solve over a grid; ranged flags take `start:stop[:count]`.
    Sweep,
    /// Run the method on a two-eigenvalue test function and check each step.
    Simulate,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Csv,
    JsonLines,
}

/// Numeric flags are kept as text: they may be exact rationals (`2/11`,
/// `0.25`) or, for `sweep`, ranges.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Algorithm key, e.g. `gd-els` or `pgm_constant`.
    #[arg(long, global = true)]
    pub alg: Option<String>,
    #[arg(long, global = true)]
    pub mu: Option<String>,
    #[arg(long = "L", global = true)]
    pub l: Option<String>,
    /// Condition number; sets `L = kappa * mu`.
    #[arg(long, global = true)]
    pub kappa: Option<String>,
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    #[arg(long = "eps", global = true)]
    pub epsilon: Option<String>,
    #[arg(long, global = true)]
    pub eta: Option<String>,
    #[arg(long, global = true)]
    pub delta: Option<String>,
    #[arg(long, global = true)]
    pub c1: Option<String>,
    #[arg(long, global = true)]
    pub c2: Option<String>,
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Seed of the random noise directions in `simulate`.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Solver feasibility and duality-gap tolerance.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    /// Scenario file of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Iterations for `simulate`.
    #[arg(long, global = true, default_value_t = 10)]
    pub steps: usize,
    /// Weight of the l1 term in `simulate` (composite methods only).
    #[arg(long, global = true)]
    pub lambda: Option<String>,
}
