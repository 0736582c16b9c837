use std::path::PathBuf;

use brqw::polymer::FamilyTag;
use brqw::{CoinSpec, GraphKind, NormKind};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "brqw", version, about = "Balanced random quantum walks: dynamics, exact sums and polymer bounds")]
pub struct Cli {
    /// key = value file with defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads. Results do not depend on it.
    #[arg(long, global = true, env = "BRQW_WORKERS", value_parser = positive_usize)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte-Carlo average of the exponential moment over disorder.
    Simulate(SimulateArgs),
    /// Exact S_n(α) from phase-content classes.
    ExactSum(ExactSumArgs),
    /// Phase-content class table for one length.
    Classes(ClassesArgs),
    /// Partition functions, free energies and susceptibilities of SAW/SP.
    Polymer(PolymerArgs),
    /// Plane generating functions and the SAW mass.
    Mass(MassArgs),
    /// Closed-form bounds on α_c and the localisation length.
    Report(ReportArgs),
    /// Monte-Carlo against the exact sum, with z-scores.
    Crosscheck(CrosscheckArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Write the result to this file instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,

    /// Write each table as <name>.csv and the summary as summary.json here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,

    /// Format of the result on stdout or in --out.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct WalkArgs {
    #[arg(long, default_value = "lattice")]
    pub graph: GraphKind,

    /// Half the coordination number.
    #[arg(long, default_value_t = 2, value_parser = dimension)]
    pub d: usize,

    /// fourier, hadamard or file:<path.csv>.
    #[arg(long, default_value = "hadamard")]
    pub coin: CoinSpec,

    /// Initial coin state: a label (a1, a2^-1) or an index 0..2d.
    #[arg(long, default_value = "a1")]
    pub tau0: String,

    /// depth, l1, linf or l<p>. Defaults to depth on the tree, l1 on the lattice.
    #[arg(long)]
    pub norm: Option<NormKind>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,

    /// Number of steps.
    #[arg(long, default_value_t = 4)]
    pub n: usize,

    /// Comma-separated α grid.
    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = non_negative)]
    pub alpha: Vec<f64>,

    /// Disorder realisations M.
    #[arg(long, default_value_t = 1000, value_parser = samples)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cap on basis states on the tree.
    #[arg(long, default_value_t = brqw::dynamics::DEFAULT_NODE_BUDGET as u64)]
    pub node_budget: u64,

    /// Report every step 1..=n, not only n.
    #[arg(long)]
    pub all_steps: bool,

    /// Include wall-clock time in the JSON output.
    #[arg(long)]
    #[serde(skip)]
    pub timing: bool,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExactSumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,

    #[arg(long, default_value_t = 4)]
    pub n: usize,

    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = non_negative)]
    pub alpha: Vec<f64>,

    /// Cap on enumerated paths.
    #[arg(long, default_value_t = brqw::DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ClassesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,

    #[arg(long, default_value_t = 4)]
    pub n: usize,

    /// List every class (n <= 6).
    #[arg(long)]
    pub dump: bool,

    #[arg(long, default_value_t = brqw::DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct PolymerArgs {
    /// saw or sp.
    #[arg(long, default_value = "saw")]
    pub family: FamilyTag,

    #[arg(long, default_value = "lattice")]
    pub graph: GraphKind,

    #[arg(long, default_value_t = 2, value_parser = dimension)]
    pub d: usize,

    #[arg(long, default_value_t = 8, value_parser = positive_usize)]
    pub n_max: usize,

    #[arg(long, value_delimiter = ',', default_value = "0", value_parser = non_negative)]
    pub alpha: Vec<f64>,

    /// Comma-separated fugacities for the susceptibility.
    #[arg(long, value_delimiter = ',', default_value = "0.1", value_parser = non_negative)]
    pub z: Vec<f64>,

    #[arg(long)]
    pub norm: Option<NormKind>,

    #[arg(long, default_value_t = brqw::DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MassArgs {
    #[arg(long, default_value_t = 2, value_parser = dimension)]
    pub d: usize,

    /// Fugacity; see --z-critical.
    #[arg(long, value_parser = positive, conflicts_with = "z_critical")]
    pub z: Option<f64>,

    /// Use z = 1/(2d).
    #[arg(long)]
    pub z_critical: bool,

    #[arg(long, default_value_t = 4, value_parser = positive_usize)]
    pub l_max: usize,

    #[arg(long, default_value_t = 12)]
    pub n_max: usize,

    /// Relative slack in the upper sandwich check.
    #[arg(long, default_value_t = 0.0, value_parser = non_negative)]
    pub slack: f64,

    #[arg(long, default_value_t = brqw::DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ReportArgs {
    /// Closed-form bounds on α_c and 𝓛.
    #[arg(long, required = true)]
    pub bounds: bool,

    #[arg(long, default_value_t = 2, value_parser = dimension)]
    pub d: usize,

    /// Walk length for the connective-constant bracket one dimension down.
    /// Defaults to the largest length up to 8 that fits the budget.
    #[arg(long, value_parser = positive_usize)]
    pub n_max: Option<usize>,

    #[arg(long, default_value_t = brqw::DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct CrosscheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub walk: WalkArgs,

    #[arg(long, default_value_t = 5, value_parser = positive_usize)]
    pub n_max: usize,

    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2", value_parser = non_negative)]
    pub alpha: Vec<f64>,

    #[arg(long, default_value_t = 10_000, value_parser = samples)]
    pub samples: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Largest accepted |z-score|.
    #[arg(long, default_value_t = 4.0, value_parser = positive)]
    pub threshold: f64,

    #[arg(long, default_value_t = brqw::dynamics::DEFAULT_NODE_BUDGET as u64)]
    pub node_budget: u64,

    #[arg(long, default_value_t = brqw::DEFAULT_ENUMERATION_BUDGET as u64)]
    pub budget: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be finite and >= 0, got {v}"))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v = non_negative(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err("must be > 0".into())
    }
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("must be an integer >= 1, got `{s}`")),
    }
}

fn dimension(s: &str) -> Result<usize, String> {
    let v = positive_usize(s)?;
    if v <= brqw::graph::MAX_D {
        Ok(v)
    } else {
        Err(format!("must be <= {}", brqw::graph::MAX_D))
    }
}

fn samples(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(v) if v >= 2 => Ok(v),
        _ => Err(format!("need at least 2 samples for a standard error, got `{s}`")),
    }
}
