//! `textrait`: batch experiments for inferring a Likert-scale score from
//! free-text responses.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use textrait_core::{DatasetFormat, ErrorKind};

use crate::config::RunConfig;

/// Bad arguments or configuration; exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "textrait", version, about = "Infer a self-rated score from free text and evaluate the models")]
struct Cli {
    /// JSON run configuration; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; every other seed is derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct DatasetArgs {
    /// Dataset file (CSV or JSONL); overrides the config.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FormatArg {
    Csv,
    Jsonl,
}

impl From<FormatArg> for DatasetFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => DatasetFormat::Csv,
            FormatArg::Jsonl => DatasetFormat::Jsonl,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a dataset, apply the length filter and write it back as CSV.
    Ingest {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        min_length: Option<usize>,
    },
    /// Fit the configured featurizer and forest on the training split.
    Train {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        min_length: Option<usize>,
    },
    /// Score a saved model on a dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DatasetArgs,
        /// Score only the held-out partition the model was trained beside.
        #[arg(long)]
        held_out: bool,
    },
    /// Evaluate every featurizer at every minimum length.
    Grid {
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Fit a topic model and correlate each topic with the target.
    Topics {
        #[command(flatten)]
        data: DatasetArgs,
        #[arg(long)]
        min_length: Option<usize>,
    },
    /// Correlates and group breakdowns of a model's predictions.
    Analyze {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        data: DatasetArgs,
    },
    /// Generate a synthetic corpus with a planted signal.
    Synth {
        #[arg(long)]
        documents: Option<usize>,
        #[arg(long)]
        signal_strength: Option<f64>,
        #[arg(long)]
        length_mean: Option<f64>,
    },
    /// Summarize the reports found in a previous output directory.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<UsageError>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<textrait_core::Error>() {
            return match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Internal => 4,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<serde_json::Error>().is_some() {
            return 3;
        }
    }
    4
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let mut run = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        run.seed = seed;
    }
    if let Some(out) = cli.out {
        run.out = out;
    }
    match cli.command {
        Command::Ingest { data, min_length } => commands::ingest(run, &data, min_length),
        Command::Train { data, min_length } => commands::train(run, &data, min_length),
        Command::Evaluate { model, data, held_out } => commands::evaluate(run, &model, &data, held_out),
        Command::Grid { data } => commands::grid(run, &data),
        Command::Topics { data, min_length } => commands::topics(run, &data, min_length),
        Command::Analyze { model, data } => commands::analyze(run, &model, &data),
        Command::Synth {
            documents,
            signal_strength,
            length_mean,
        } => {
            if let Some(n) = documents {
                run.synth.documents = n;
            }
            if let Some(l) = signal_strength {
                run.synth.signal_strength = l;
            }
            if let Some(m) = length_mean {
                run.synth.length_mean = m;
            }
            commands::synth(run)
        }
        Command::Report { input } => commands::report(run, &input),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TEXTRAIT_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
