mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use vqc_core::VqcError;

/// Train and evaluate a four-class one-vs-all variational quantum classifier.
#[derive(Debug, Parser)]
#[command(name = "vqc", version)]
struct Cli {
    /// Worker threads for per-sample circuit evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a model on a feature CSV or a synthetic dataset.
    Train(Box<TrainArgs>),
    /// Print per-class and macro AUC / F1 and the confusion matrix.
    Eval(EvalArgs),
    /// Predict a label and four scores per row.
    Predict(PredictArgs),
    /// Compare parameter-shift gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Write a synthetic four-blob dataset as a feature CSV.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SynthKind {
    Blobs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Training feature CSV (`f0,...,f{D-1},label`).
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    pub train: Option<PathBuf>,
    /// Generate the training set instead of reading one.
    #[arg(long, value_enum)]
    pub synth: Option<SynthKind>,
    #[arg(long, default_value_t = 50)]
    pub synth_n: usize,
    #[arg(long, default_value_t = 8)]
    pub synth_dim: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    /// Validation CSV; the training set is reused when absent.
    #[arg(long)]
    pub val: Option<PathBuf>,
    /// TOML file with defaults for the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `amplitude` or `angle`.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub qubits: Option<usize>,
    #[arg(long)]
    pub layers: Option<usize>,
    /// Give every classifier a trainable additive bias.
    #[arg(long)]
    pub bias: bool,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub margin: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// `sgd`, `momentum`, or `adam`.
    #[arg(long)]
    pub optimizer: Option<String>,
    /// Enable validation-loss early stopping with this patience.
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub min_delta: Option<f64>,
    /// Four comma-separated loss weights in label order (none, infection, ischaemia, both).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub class_weights: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Model file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch JSON-lines log to write.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Also write the report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Feature CSV, with or without a `label` column.
    #[arg(long)]
    pub data: PathBuf,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 20, allow_negative_numbers = true)]
    pub trials: i64,
    #[arg(long, default_value_t = 4)]
    pub qubits: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = vqc_core::training::DEFAULT_MARGIN)]
    pub margin: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub n_per_class: usize,
    #[arg(long, default_value_t = 8)]
    pub dim: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || match &cli.command {
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Predict(args) => commands::predict(args),
        Command::Gradcheck(args) => commands::gradcheck(args),
        Command::Synth(args) => commands::synth(args),
    };
    let result = match cli.threads {
        Some(0) => Err(VqcError::InvalidArgument("--threads must be at least 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(VqcError::InvalidArgument(format!("cannot start thread pool: {e}"))),
        },
        None => run(),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
