use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "warwalk", version, about = "Termination times of multiplayer War and the sticky random walk")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the sticky random walk from one start.
    Walk(WalkArgs),
    /// Sticky-walk means over a grid of deck sizes and player counts.
    Sweep(SweepArgs),
    /// Random-card War with a winning rule.
    Pwar(PwarArgs),
    /// Top-card War with a strength function.
    Fwar(FwarArgs),
    /// Standard 52-card War.
    War(WarArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Re-run a manifest and check the summary is reproduced.
    Replay(ReplayArgs),
}

/// Flags shared by every simulation. Unset flags fall back to `--config`, then defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Replications (default 1000).
    #[arg(long)]
    pub reps: Option<u64>,
    /// Master seed. Required, here or in the config file.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Rounds before a run is censored (default 100 n^2).
    #[arg(long)]
    pub round_cap: Option<u64>,
    /// Worker threads (default: available cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Flat `key = value` file using the flag names as keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DealMode {
    Claim,
    Equal,
}

#[derive(Debug, Clone, Default, Args)]
pub struct OutputArgs {
    /// Directory for `<variant>_summary.csv`, `<variant>_manifest.json` and the histogram.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Also write `<variant>_histogram.csv`.
    #[arg(long)]
    pub hist: bool,
    /// Histogram bin width in rounds (default 50).
    #[arg(long)]
    pub bin_width: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<usize>,
    /// Explicit start, e.g. `3,4`, instead of equal hands.
    #[arg(long)]
    pub sizes: Option<String>,
    /// Also solve for the exact expectation.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum)]
    pub output: Option<OutputFormat>,
    /// Write the experiment manifest here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    /// Comma-separated deck sizes.
    #[arg(long)]
    pub n_list: Option<String>,
    /// Comma-separated player counts.
    #[arg(long)]
    pub m_list: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct PwarArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub sizes: Option<String>,
    /// `uniform_active` or `highest_card`.
    #[arg(long)]
    pub rule: Option<String>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FwarArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub m: Option<usize>,
    /// `affine` (a + n), `constant` or `quadratic` (a^2 + n^2).
    #[arg(long)]
    pub strength: Option<String>,
    /// Random independent deal (default) or equal split.
    #[arg(long, value_enum)]
    pub deal: Option<DealMode>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WarArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub players: Option<usize>,
    /// Reject player counts that do not divide 52.
    #[arg(long)]
    pub strict_deal: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Largest deck for the exhaustive checks (default 12).
    #[arg(long)]
    pub max_n: Option<u32>,
    /// Most players for the exhaustive checks (default 4).
    #[arg(long)]
    pub max_m: Option<usize>,
    /// Extra winning rule to validate, as `key = value` lines.
    #[arg(long)]
    pub rule_file: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write every check as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
}
