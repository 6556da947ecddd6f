use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "harmonium", version, about = "Ground state, reduced density matrices and entanglement of the two-species fermionic harmonium")]
pub struct Cli {
    /// TOML file mirroring the command-line flags; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps, grids and quadrature.
    #[arg(long, global = true, env = "HARMONIUM_JOBS")]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate quantities at one (N, Lambda) point.
    Eval(EvalArgs),
    /// Evaluate quantities over a grid of N and Lambda values.
    Sweep(SweepArgs),
    /// Tabulate rho_a(x, x'), D_ab or D_aa on a square grid.
    Grid(GridArgs),
    /// Run the oracle suite and write a JSON report.
    Verify(VerifyArgs),
    /// List the registered quantity names.
    Quantities,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum GridQuantity {
    RhoA,
    DAb,
    DAa,
}

impl GridQuantity {
    pub fn name(self) -> &'static str {
        match self {
            GridQuantity::RhoA => "rho_a",
            GridQuantity::DAb => "d_ab",
            GridQuantity::DAa => "d_aa",
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long, allow_hyphen_values = true, conflicts_with = "nlambda")]
    pub lambda: Option<f64>,

    /// The product N * Lambda; Lambda is derived from it.
    #[arg(long, allow_hyphen_values = true)]
    pub nlambda: Option<f64>,

    /// Comma-separated quantity names.
    #[arg(long, value_delimiter = ',')]
    pub quantity: Vec<String>,

    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma-separated particle numbers per species.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,

    /// Lambda values: a comma-separated list or `start:stop:step`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "nlambda")]
    pub lambda: Option<String>,

    /// N * Lambda values: a comma-separated list or `start:stop:step`.
    #[arg(long, allow_hyphen_values = true)]
    pub nlambda: Option<String>,

    #[arg(long, value_delimiter = ',')]
    pub quantity: Vec<String>,

    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    /// `csv` (default) or `json`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n: Option<usize>,

    #[arg(long, allow_hyphen_values = true, conflicts_with = "nlambda")]
    pub lambda: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub nlambda: Option<f64>,

    #[arg(long, value_enum)]
    pub quantity: Option<GridQuantity>,

    /// Half-width `L` for `[-L, L]`, or `min:max`. Defaults to six times the
    /// wider one-body Gaussian width.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,

    /// Points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,

    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest N checked.
    #[arg(long)]
    pub n_max: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte Carlo samples per estimate.
    #[arg(long)]
    pub mc_samples: Option<u64>,

    #[arg(long, hide = true)]
    pub tolerance_scale: Option<f64>,

    /// Report file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
