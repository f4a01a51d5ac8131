use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod failure;
mod input;

use failure::exit_code;

#[derive(Debug, Parser)]
#[command(name = "diagsynth", version, about = "RZ+CNOT synthesis of diagonal unitaries")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Global {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file (stdout when omitted).
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    /// Override the acceptance tolerance of the command.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesise a diagonal unitary read from a JSON or plain-text phase file.
    Decompose(DecomposeArgs),
    /// Gate counts of the ansatz against the reference totals.
    Bench(BenchArgs),
    /// Print the CNOT control sequence of an n-qubit tail.
    Sequence(SequenceArgs),
    /// Generate a raw or pretty dataset.
    Dataset(DatasetArgs),
    /// Fit a linear model to a dataset.
    Train(TrainArgs),
    /// Snap a trained model to the half-integer lattice and compare with the phase map.
    Analyze(AnalyzeArgs),
    /// Run an invariant battery.
    Verify(VerifyArgs),
    /// Cluster the inputs of a dataset.
    Cluster(ClusterArgs),
    /// Largest-cluster share of raw data across qubit counts.
    Share(ShareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tree,
    Fractal,
}

impl From<Kind> for diagsynth::sequences::SequenceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Tree => Self::BinaryTree,
            Kind::Fractal => Self::StrangeFractal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Qasm,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DecomposeArgs {
    /// Phase file: JSON `{"n": .., "lambda": [..]}` or one phase per line.
    pub input: PathBuf,
    #[arg(long = "seq", value_enum, default_value_t = Kind::Tree)]
    pub kind: Kind,
    /// Output format when writing a single stream.
    #[arg(long, value_enum, default_value_t = Format::Qasm)]
    pub format: Format,
    /// Write `<prefix>.qasm` and `<prefix>.json`.
    #[arg(long)]
    pub prefix: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 9)]
    pub n_max: usize,
    /// Random diagonals decomposed and checked per qubit count.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long = "seq", value_enum, default_value_t = Kind::Tree)]
    pub kind: Kind,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SequenceArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Kind::Tree)]
    pub kind: Kind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageArg {
    Raw,
    Pretty,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DatasetArgs {
    #[arg(long, value_enum)]
    pub stage: StageArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Pretty stage: half-width of the angle cube.
    #[arg(long, default_value_t = diagsynth::mlpipe::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Raw stage: half-width of the target phases.
    #[arg(long, default_value_t = diagsynth::mlpipe::DEFAULT_RAW_DELTA)]
    pub delta: f64,
    /// Raw stage: probability of the π-jumped template.
    #[arg(long, default_value_t = 0.25)]
    pub mutation_prob: f64,
    /// Raw stage: probability of the doubled template.
    #[arg(long, default_value_t = 0.25)]
    pub doubled_prob: f64,
    /// Raw stage: keep only the dominant cluster.
    #[arg(long)]
    pub filter: bool,
    #[arg(long, default_value_t = diagsynth::cluster::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long = "seq", value_enum, default_value_t = Kind::Tree)]
    pub kind: Kind,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Dataset file (.json or .csv).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub step_size: usize,
    #[arg(long, default_value_t = 5000)]
    pub epochs: usize,
    #[arg(long, default_value_t = diagsynth::tol::TRAIN_STOP_LOSS)]
    pub stop_loss: f64,
    #[arg(long)]
    pub no_standardize: bool,
    #[arg(long)]
    pub no_bias: bool,
    /// Per-sample steps instead of full-batch gradient descent.
    #[arg(long)]
    pub per_sample: bool,
    /// Fraction of rows held out for the reported metrics.
    #[arg(long, default_value_t = 0.0)]
    pub test_fraction: f64,
    /// Also write the per-epoch loss and learning rate as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset for regression metrics.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Rn,
    Weyl,
    Roundtrip,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 8)]
    pub n_max: usize,
    /// Roundtrip: random diagonals per qubit count. Weyl: grid points.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ClusterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value_t = diagsynth::cluster::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Principal components added to the per-sample table (0 disables).
    #[arg(long, default_value_t = 2)]
    pub pca: usize,
    /// Also write the per-cluster sizes.
    #[arg(long)]
    pub sizes: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShareArgs {
    #[arg(long, default_value_t = 2)]
    pub n_min: usize,
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.25)]
    pub mutation_prob: f64,
    #[arg(long, default_value_t = 0.25)]
    pub doubled_prob: f64,
    #[arg(long, default_value_t = diagsynth::cluster::DEFAULT_THRESHOLD)]
    pub threshold: f64,
}

fn configure_threads() {
    let Ok(value) = std::env::var("DIAGSYNTH_THREADS") else { return };
    match value.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
        }
        _ => log::warn!("ignoring DIAGSYNTH_THREADS={value:?}"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Decompose(a) => commands::decompose(g, a),
        Command::Bench(a) => commands::bench(g, a),
        Command::Sequence(a) => commands::sequence(g, a),
        Command::Dataset(a) => commands::dataset(g, a),
        Command::Train(a) => commands::train(g, a),
        Command::Analyze(a) => commands::analyze(g, a),
        Command::Verify(a) => commands::verify(g, a),
        Command::Cluster(a) => commands::cluster(g, a),
        Command::Share(a) => commands::share(g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
