//! `hag`: build, check and run hierarchically aggregated computation graphs.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hag_core::exec::{Activation, ModelKind};
use hag_core::AggregateMode;

#[derive(Parser, Debug)]
#[command(name = "hag", version, about = "Hierarchically aggregated computation graphs for GNNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Search for a cheaper equivalent HAG and write it as JSON.
    Optimize(OptimizeArgs),
    /// Check that a HAG file is equivalent to a graph.
    Verify(VerifyArgs),
    /// Run a GNN forward pass over the graph or a HAG.
    Run(RunArgs),
    /// Search at several capacities and report one CSV row per capacity.
    Sweep(SweepArgs),
    /// Compare the greedy search with exhaustive references on a small graph.
    OracleCompare(OracleArgs),
    /// Write a synthetic graph as an edge list.
    Gen(GenArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GraphInput {
    /// Edge list, one `u v` per line meaning v aggregates u; `-` reads stdin.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Add the reverse of every edge.
    #[arg(long)]
    pub undirected: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    #[arg(long, default_value = "set", value_parser = parse_mode)]
    pub mode: AggregateMode,
    /// Maximum number of aggregation nodes.
    #[arg(long, conflicts_with = "capacity_frac")]
    pub capacity: Option<usize>,
    /// Capacity as a fraction of |V|, rounded down.
    #[arg(long, default_value_t = 0.25)]
    pub capacity_frac: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Where to write the HAG JSON.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Write one JSON line per search iteration here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Print the report as JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long)]
    pub hag: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Gcn,
    SagePool,
    Seq,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Gcn => ModelKind::Gcn,
            ModelArg::SagePool => ModelKind::SagePool,
            ModelArg::Seq => ModelKind::SeqRecurrent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Identity,
    Relu,
    Tanh,
}

impl From<ActivationArg> for Activation {
    fn from(a: ActivationArg) -> Self {
        match a {
            ActivationArg::Identity => Activation::Identity,
            ActivationArg::Relu => Activation::Relu,
            ActivationArg::Tanh => Activation::Tanh,
        }
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    /// Execute this HAG; without it the plain graph is used.
    #[arg(long)]
    pub hag: Option<PathBuf>,
    /// Search settings used when --compare needs a HAG and none is given.
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, value_enum, default_value = "gcn")]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value = "relu")]
    pub activation: ActivationArg,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exact integer arithmetic (GCN only).
    #[arg(long)]
    pub integer: bool,
    /// Input features as CSV, one row per node; random when omitted.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Run both the graph and the HAG and report the largest deviation.
    #[arg(long)]
    pub compare: bool,
    /// Where to write the final activations as CSV.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long, default_value = "set", value_parser = parse_mode)]
    pub mode: AggregateMode,
    /// Capacities as `a..b` (inclusive) or a comma list; defaults to
    /// 0, 1, 2, 4, ... up to |V|/4.
    #[arg(long)]
    pub capacities: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[command(flatten)]
    pub graph: GraphInput,
    #[arg(long, default_value_t = 2)]
    pub capacity: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub kind: GenKind,
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// A, B aggregate {C, D}; C, D aggregate {A, B}.
    Diamond,
    /// M consumers sharing the same N producers.
    Share { m: usize, n: usize },
    /// Directed Erdős–Rényi graph.
    Er {
        n: usize,
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shuffle each neighbor list.
        #[arg(long)]
        shuffle: bool,
    },
}

fn parse_mode(s: &str) -> Result<AggregateMode, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Optimize(a) => commands::optimize(a),
        Command::Verify(a) => commands::verify(a),
        Command::Run(a) => commands::run(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::OracleCompare(a) => commands::oracle_compare(a),
        Command::Gen(a) => commands::gen(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("hag: {e}");
            e.exit_code()
        }
    }
}
