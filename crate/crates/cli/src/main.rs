//! `bayesqa` command-line tool.
//!
//! Exit status is 0 on success, 1 when an operation fails (the message
//! starts with the error name) and 2 on invalid usage.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "bayesqa",
    version,
    about = "Exact inference over Bayesian networks and ProbLog programs"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output style.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,

    /// Digits after the decimal point in human output.
    #[arg(long, global = true, default_value_t = 9)]
    pub precision: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Human,
    /// One JSON document per invocation.
    Machine,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network file and list every violation.
    Validate(ValidateArgs),
    /// Conditional probability or posterior distribution over a network.
    Infer(InferArgs),
    /// Evaluate the queries of a ProbLog program.
    Solve(SolveArgs),
    /// Translate a network into a ProbLog program.
    ToProblog(ToProblogArgs),
    /// Translate a ProbLog program into a network.
    FromProblog(FromProblogArgs),
    /// Marginalize a network onto some of its variables.
    Subset(SubsetArgs),
    /// Generate question-answering instances from networks.
    GenDataset(GenDatasetArgs),
    /// Map between probabilities and estimative phrases.
    Wep(WepArgs),
    /// Reasoning labels of a query given the observed variables.
    Classify(ClassifyArgs),
    /// Score predictions against generated instances.
    Score(ScoreArgs),
    /// Predict 0.5 for every instance.
    Baseline(BaselineArgs),
    /// Size statistics over networks and instances.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub network: PathBuf,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// `variable=state`, or a bare variable for its whole posterior.
    #[arg(long)]
    pub query: String,
    /// `variable=state`; repeatable.
    #[arg(long)]
    pub evidence: Vec<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Elimination)]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Enumeration,
    Elimination,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub program: PathBuf,
    #[arg(long, value_enum, default_value_t = EngineArg::Worlds)]
    pub engine: EngineArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    /// Possible-world enumeration; accepts any program of the fragment.
    Worlds,
    /// Compile to a network and run variable elimination.
    Network,
}

#[derive(Debug, Args)]
pub struct ToProblogArgs {
    pub network: PathBuf,
    #[arg(long, default_value = "subject")]
    pub entity: String,
    /// Adds a query; `variable=state`.
    #[arg(long)]
    pub query: Option<String>,
    /// Adds evidence; `variable=state`, repeatable. Needs `--query`.
    #[arg(long, requires = "query")]
    pub evidence: Vec<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FromProblogArgs {
    pub program: PathBuf,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SubsetArgs {
    pub network: PathBuf,
    /// Variables to keep; repeatable or comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub keep: Vec<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Network files; repeatable.
    #[arg(long, required = true)]
    pub network: Vec<PathBuf>,
    /// Instances per network.
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Output directory; one subdirectory per network.
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long, default_value = "subject")]
    pub entity: String,
    /// Worker threads; the output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct WepArgs {
    /// Probability to verbalize.
    #[arg(long, conflicts_with = "phrase", required_unless_present_any = ["phrase", "table"])]
    pub probability: Option<f64>,
    /// Phrase to map back to its anchor.
    #[arg(long)]
    pub phrase: Option<String>,
    /// Print the phrase table.
    #[arg(long, conflicts_with_all = ["probability", "phrase"])]
    pub table: bool,
    /// Independent draws for `--probability`.
    #[arg(long, default_value_t = 1)]
    pub draws: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// Query variable; a `=state` suffix is ignored.
    #[arg(long)]
    pub query: String,
    /// Observed variables; repeatable or comma separated.
    #[arg(long, value_delimiter = ',')]
    pub evidence: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// `instances.jsonl` files; repeatable.
    #[arg(long, required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long)]
    pub predictions: PathBuf,
    /// Ascending premise-count bucket edges, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub bucket_edges: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, required = true)]
    pub instances: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long, required = true)]
    pub network: Vec<PathBuf>,
    #[arg(long)]
    pub instances: Vec<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
