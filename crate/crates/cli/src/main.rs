//! `sno`: dataset generation, training, evaluation, zero-shot
//! super-resolution, transform inspection and runtime benchmarks for the
//! Sumudu neural operator.

mod commands;
mod exit;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "sno", version, about = "Sumudu neural operator pipeline", after_help = exit::CONTRACT)]
struct Cli {
    /// Worker threads for data generation and evaluation.
    #[arg(long, global = true, env = "SNO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset from a task spec file.
    #[command(after_help = exit::CONTRACT)]
    Gen(GenArgs),
    /// Train a model on a dataset named in a run config file.
    #[command(after_help = exit::CONTRACT)]
    Train(TrainArgs),
    /// Evaluate a checkpoint on the test split of a dataset.
    #[command(after_help = exit::CONTRACT)]
    Eval(EvalArgs),
    /// Evaluate a checkpoint at resolutions finer than it was trained on.
    #[command(after_help = exit::CONTRACT)]
    Superres(SuperresArgs),
    /// Time the polynomial decomposition against a radix-2 FFT.
    #[command(after_help = exit::CONTRACT)]
    Bench(BenchArgs),
    /// Print the polynomial coefficients and Sumudu spectrum of a signal.
    #[command(after_help = exit::CONTRACT)]
    Transform(TransformArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Task spec (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Dataset file to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples along the time axis.
    #[arg(long)]
    pub resolution: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Run config (TOML): `dataset = "<path>"` plus training settings.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for the checkpoint, loss curve and manifest.
    #[arg(long)]
    pub out: PathBuf,
    /// Seeds both the initialization and the batch order.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub degree: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Checkpoint archive (its `.toml` sidecar must sit next to it).
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset file.
    #[arg(long)]
    pub data: PathBuf,
    /// Output directory for the report.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SuperresArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Dataset generated at the finest evaluation resolution.
    #[arg(long)]
    pub data: PathBuf,
    /// Resolution the model sees its inputs at.
    #[arg(long)]
    pub resolution: usize,
    /// Evaluation resolutions, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eval: Vec<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Signal lengths, comma separated powers of two.
    #[arg(long, value_delimiter = ',', default_value = "4096,8192,16384,32768,65536,131072,262144")]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 16)]
    pub degree: usize,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// poly-fit, poly-fit-cold and/or fft, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "poly-fit,fft")]
    pub methods: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    /// CSV with one column (values on a uniform grid) or two (t, f).
    pub signal: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub degree: usize,
    /// Output directory; without it the table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(exit::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Train(a) => commands::train(a),
        Command::Eval(a) => commands::eval(a),
        Command::Superres(a) => commands::superres(a),
        Command::Bench(a) => commands::bench(a),
        Command::Transform(a) => commands::transform(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::code_for(&e))
        }
    }
}
