//! `regdec`: regular decomposition of large sparse graphs from the command
//! line. Generates benchmark graphs, fits and sweeps decompositions,
//! summarizes labeled block structure, and prints the closed-form
//! planted-partition predictions.
//!
//! Every command echoes a run record to stdout and, when an output
//! directory is involved, writes it there as `run.json`. All randomness
//! derives from `--seed`, so reruns with the same arguments reproduce every
//! output file byte for byte (the recorded wall time aside).

mod ops;
mod record;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "regdec", version, about = "Regular decomposition of large sparse graphs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a synthetic benchmark graph
    Generate(GenerateArgs),
    /// Fit a decomposition to a graph and label every component node
    Decompose(DecomposeArgs),
    /// Sweep reference and target sample sizes against ground truth
    SweepRefs(SweepArgs),
    /// Reduce a labeled graph to group sizes and link densities
    Summarize(SummarizeArgs),
    /// Print closed-form planted-partition predictions
    Theory(TheoryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Format {
    /// Pretty-printed run record
    Json,
    /// Summary metrics as a two-line CSV table
    Csv,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Base RNG seed; every random choice derives from it
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// How to print the run summary on stdout
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Model {
    /// Two equal blocks, intra-degree a, inter-degree b
    Planted,
    /// Stochastic block model from sizes and a probability matrix
    Sbm,
    /// Preferential attachment growth from a seed triangle
    Pa,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Model to sample
    #[arg(long, value_enum)]
    pub model: Model,
    /// Node count (planted, pa)
    #[arg(long)]
    pub n: Option<usize>,
    /// Expected intra-block degree (planted)
    #[arg(long)]
    pub a: Option<f64>,
    /// Expected inter-block degree (planted)
    #[arg(long)]
    pub b: Option<f64>,
    /// Comma-separated block sizes (sbm)
    #[arg(long, value_delimiter = ',')]
    pub sizes: Vec<usize>,
    /// Comma-separated row-major link probabilities, k*k entries (sbm)
    #[arg(long, value_delimiter = ',')]
    pub probs: Vec<f64>,
    /// Links per arriving node (pa)
    #[arg(long, default_value_t = 3)]
    pub links: usize,
    /// Directory for graph.edges and labels.csv
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
#[command(group(ArgGroup::new("order").required(true).args(["k", "k_max"])))]
pub struct DecomposeArgs {
    /// Edge-list file (whitespace-separated pairs, # for comments)
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as directed arcs; the giant strongly connected
    /// component is decomposed instead of the weak one
    #[arg(long)]
    pub directed: bool,
    /// Fixed group count
    #[arg(long)]
    pub k: Option<u32>,
    /// Sweep k = 1..=k_max and keep the knee of the cost curve
    #[arg(long)]
    pub k_max: Option<u32>,
    /// Random restarts of the local search
    #[arg(long, default_value_t = 100)]
    pub restarts: u32,
    /// Local updates per restart
    #[arg(long, default_value_t = 30)]
    pub iters: u32,
    /// Reference nodes: all, uniform:<m>, betweenness:<pairs>,<m>, or
    /// file:<path> (one-column node_id CSV)
    #[arg(long)]
    pub refs: String,
    /// Target nodes to fit on: all, sample:<n>, or file:<path>
    #[arg(long, default_value = "all")]
    pub targets: String,
    /// After classification, label unlabeled neighbors by majority vote
    #[arg(long)]
    pub expand: bool,
    /// Relative cost-drop threshold for the model-order knee
    #[arg(long, default_value_t = 0.02)]
    pub tau: f64,
    /// Lower bound applied to fitted means
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon_floor: f64,
    /// Ground-truth labels CSV; adds a misclassification metric
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Directory for labeling, model, curve and reference files
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Edge-list file
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as directed arcs
    #[arg(long)]
    pub directed: bool,
    /// Ground-truth labels CSV covering the giant component
    #[arg(long)]
    pub labels: PathBuf,
    /// Reference-set sizes to sweep
    #[arg(long, value_delimiter = ',', required = true)]
    pub m_list: Vec<usize>,
    /// Target-sample sizes to sweep
    #[arg(long, value_delimiter = ',', required = true)]
    pub target_sizes: Vec<usize>,
    /// Trials per (m, n_targets) cell
    #[arg(long, default_value_t = 5)]
    pub trials: u64,
    /// Group count fitted in every trial
    #[arg(long, default_value_t = 2)]
    pub k: u32,
    /// Random restarts of the local search
    #[arg(long, default_value_t = 100)]
    pub restarts: u32,
    /// Local updates per restart
    #[arg(long, default_value_t = 30)]
    pub iters: u32,
    /// Lower bound applied to fitted means
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon_floor: f64,
    /// Directory for sweep.csv
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SummarizeArgs {
    /// Edge-list file
    #[arg(long)]
    pub graph: PathBuf,
    /// Treat edges as directed arcs
    #[arg(long)]
    pub directed: bool,
    /// node_id,group CSV; may cover any node subset
    #[arg(long)]
    pub labels: PathBuf,
    /// Directory for block_summary.json
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct TheoryArgs {
    /// Expected intra-block degree
    #[arg(long)]
    pub a: f64,
    /// Expected inter-block degree
    #[arg(long)]
    pub b: f64,
    /// Node count the predictions are evaluated at
    #[arg(long)]
    pub n: u64,
    /// Optional directory for theory.json
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let started = Instant::now();
    let (format, out_dir, mut rec) = match &cli.command {
        Cmd::Generate(a) => (a.common.format, Some(a.out.clone()), ops::generate(a)?),
        Cmd::Decompose(a) => (a.common.format, Some(a.out.clone()), ops::decompose(a)?),
        Cmd::SweepRefs(a) => (a.common.format, Some(a.out.clone()), ops::sweep_refs(a)?),
        Cmd::Summarize(a) => (a.common.format, Some(a.out.clone()), ops::summarize(a)?),
        Cmd::Theory(a) => (a.common.format, a.out.clone(), ops::theory(a)?),
    };
    rec.wall_time_seconds = started.elapsed().as_secs_f64();

    if let Some(dir) = &out_dir {
        rec.outputs.push("run.json".to_string());
        let mut text = serde_json::to_string_pretty(&rec.to_json())?;
        text.push('\n');
        fs::write(dir.join("run.json"), text)?;
    }

    let text = match format {
        Format::Json => serde_json::to_string_pretty(&rec.to_json())? + "\n",
        Format::Csv => metrics_csv(&rec.metrics)?,
    };
    // a closed pipe downstream (e.g. | head) is not a failure
    match io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

/// Renders a flat metrics object as a header line and a value line.
fn metrics_csv(metrics: &serde_json::Value) -> Result<String> {
    let obj = metrics.as_object().expect("metrics is an object");
    let mut header = String::new();
    let mut row = String::new();
    for (i, (key, value)) in obj.iter().enumerate() {
        if i > 0 {
            header.push(',');
            row.push(',');
        }
        header.push_str(key);
        match value {
            serde_json::Value::Null => {}
            serde_json::Value::String(s) => row.push_str(s),
            other => write!(row, "{other}")?,
        }
    }
    Ok(format!("{header}\n{row}\n"))
}
