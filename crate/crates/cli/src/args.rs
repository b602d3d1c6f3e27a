use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Entanglement between the filtered outputs of a two-cavity optomechanical
/// system.
///
/// Exit status: 0 ok, 1 configuration error, 2 unstable system,
/// 3 numerical failure, 4 validation failure.
#[derive(Debug, Parser)]
#[command(name = "optoent", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlators, squeezed-state parameters and E_n for one filter.
    Entangle(EntangleArgs),
    /// E_n and moments along a grid of filter centres or delays.
    Sweep(SweepArgs),
    /// Maximize E_n over the filter centre or the delay.
    Optimize(OptimizeArgs),
    /// Spectral densities n1, n2 and m against frequency.
    Spectra(SpectraArgs),
    /// Run the invariant suite on seeded random draws.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariableArg {
    Omega,
    Tau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TauModeArg {
    Fixed,
    Formula,
    Optimize,
}

/// Flags shared by every command. Each overrides the matching key of the
/// `--config` file, which in turn overrides the built-in default.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Flat `key = value` file; `#` starts a comment.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Mechanical damping rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Both cavity linewidths.
    #[arg(long, conflicts_with_all = ["kappa1", "kappa2"])]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub kappa1: Option<f64>,
    #[arg(long)]
    pub kappa2: Option<f64>,
    /// Both effective couplings.
    #[arg(long, conflicts_with_all = ["g1", "g2", "g_over_kappa"])]
    pub g: Option<f64>,
    /// Both couplings as `G_i / κ_i`.
    #[arg(long, conflicts_with_all = ["g1", "g2"])]
    pub g_over_kappa: Option<f64>,
    #[arg(long)]
    pub g1: Option<f64>,
    #[arg(long)]
    pub g2: Option<f64>,
    /// Mechanical bath occupation.
    #[arg(long)]
    pub nm: Option<f64>,
    #[arg(long)]
    pub n1: Option<f64>,
    #[arg(long)]
    pub n2: Option<f64>,

    /// Filter centre of cavity 1 (cavity 2 is centred at -omega).
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, conflicts_with = "omega", allow_hyphen_values = true)]
    pub omega_over_kappa: Option<f64>,
    /// Filter bandwidth.
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, conflicts_with = "sigma")]
    pub sigma_over_kappa: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau2: Option<f64>,

    /// Relative quadrature tolerance, in [1e-14, 1e-2].
    #[arg(long)]
    pub quad_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Write the report here instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Print the resolved configuration as `key = value` lines and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct EntangleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub variable: Option<VariableArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, conflicts_with = "from", allow_hyphen_values = true)]
    pub from_over_kappa: Option<f64>,
    #[arg(long, conflicts_with = "to", allow_hyphen_values = true)]
    pub to_over_kappa: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// How each row picks its delay.
    #[arg(long, value_enum)]
    pub tau_mode: Option<TauModeArg>,
    /// Shorthand for `--tau-mode optimize`.
    #[arg(long, conflicts_with = "tau_mode")]
    pub optimize_tau: bool,
    /// Approximation regime for the `en_approx` column; classified per row
    /// when absent.
    #[arg(long)]
    pub regime: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Search variable.
    #[arg(long, value_enum)]
    pub over: Option<VariableArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub bracket_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub bracket_hi: Option<f64>,
    #[arg(long, conflicts_with = "bracket_lo", allow_hyphen_values = true)]
    pub bracket_lo_over_kappa: Option<f64>,
    #[arg(long, conflicts_with = "bracket_hi", allow_hyphen_values = true)]
    pub bracket_hi_over_kappa: Option<f64>,
    /// Extra point evaluated alongside the search.
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<f64>,
    /// Relative tolerance on the search variable.
    #[arg(long)]
    pub search_tol: Option<f64>,
    /// Seed the centre search with this regime's closed-form optimum.
    #[arg(long)]
    pub regime: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpectraArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub to: Option<f64>,
    #[arg(long, conflicts_with = "from", allow_hyphen_values = true)]
    pub from_over_kappa: Option<f64>,
    #[arg(long, conflicts_with = "to", allow_hyphen_values = true)]
    pub to_over_kappa: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Seed of the random draws.
    #[arg(long)]
    pub rng_seed: Option<u64>,
    /// Draws per invariant group.
    #[arg(long)]
    pub draws: Option<usize>,
}
