//! Command-line front end for `gbsamp-core`: sampling, exact tables,
//! verification runs and benchmarks, with file formats and run manifests.

pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::{CliError, CliResult};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (formats: table/1 samples/1 reports/1 manifest/1)"
);

/// Environment variable naming the default corpus directory for `verify`.
pub const CORPUS_DIR_ENV: &str = "GBSAMP_CORPUS_DIR";

#[derive(Debug, Parser)]
#[command(name = "gbsamp", version = VERSION, about = "Samplers and exact oracles for graph and boson sampling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw vertex subsets S with probability ∝ c^{2|S|}·PM(S)².
    SampleGbs(SampleGbsArgs),
    /// Draw occupancy vectors z with probability ∝ Perm(A_z)²/Π z_i!.
    SampleBs(SampleBsArgs),
    /// Exact probability tables by enumeration.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Run verification checks over the built-in corpora.
    Verify(VerifyArgs),
    /// Time the samplers over a size grid.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Per-outcome gadget bias factors.
    BiasReport(BiasArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ChainFlags {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Constant in front of the chain step formula.
    #[arg(long, default_value_t = 1.0)]
    pub step_constant: f64,
    /// Replace the step formula by a fixed step count.
    #[arg(long)]
    pub max_steps: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunFlags {
    #[arg(long, default_value_t = 1)]
    pub samples: u64,
    /// Independent replicas run in parallel; output depends on this value.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Output file (JSONL); stdout if omitted. A manifest is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-replica chain statistics (JSONL) here.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SampleGbsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[command(flatten)]
    pub chain: ChainFlags,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PmWeightMode {
    /// Exact hole weights from permanents.
    Oracle,
    /// Hole weights estimated by annealing.
    Anneal,
}

#[derive(Debug, Clone, Args)]
pub struct SampleBsArgs {
    /// Matrix file: CSV, or JSON when the name ends in `.json`.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Gadget copies per row; default ⌈4n²/ε⌉.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = PmWeightMode::Oracle)]
    pub pm_weight_mode: PmWeightMode,
    #[arg(long)]
    pub anneal_stages: Option<usize>,
    /// Consecutive non-perfect checkpoints tolerated per sample.
    #[arg(long)]
    pub retry_budget: Option<u64>,
    #[command(flatten)]
    pub chain: ChainFlags,
    #[command(flatten)]
    pub run: RunFlags,
}

#[derive(Debug, Clone, Subcommand)]
pub enum ExactCommand {
    /// μ_GBS over vertex subsets.
    Gbs {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// μ_BS over occupancy vectors.
    Bs {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The gadget's occupancy law ν.
    Gadget {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The weighted matching law, keyed by sorted edge ids.
    Matchings {
        #[arg(long)]
        graph: PathBuf,
        /// Restrict to perfect matchings.
        #[arg(long)]
        perfect: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyCheck {
    All,
    Lemma2,
    Logconcavity,
    TvGbs,
    TvBs,
    GadgetBias,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub check: VerifyCheck,
    /// Largest vertex count in the generated graph corpus.
    #[arg(long, default_value_t = 6)]
    pub corpus_max_n: usize,
    /// Samples per sampler check (and checkpoints per acceptance probe).
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Overrides the per-check ε (0.05 for GBS, 0.2 for BS, {0.1, 0.5} for the gadget).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub step_constant: f64,
    /// Directory with `graphs/*.json` and `matrices/*.{csv,json}` replacing
    /// the built-in corpora.
    #[arg(long, env = CORPUS_DIR_ENV)]
    pub corpus_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum BenchCommand {
    /// Random connected graphs G(n, 1/2) for each n in --sizes.
    Gbs(BenchArgs),
    /// Random n×n matrices with entries in {1, 2} for each n in --sizes.
    Bs(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 200)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Default 0.05 for GBS and 0.5 for BS.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BiasArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
