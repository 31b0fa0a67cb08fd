//! `reactscope`: staged pipeline from annotated pairs to a trained reaction
//! classifier and a trusted-vs-deceptive source comparison.

mod commands;
mod config;
mod error;
mod provenance;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reactscope::ingest::IngestMode;

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "reactscope", version, about = "Reaction-type classification and credibility analytics")]
struct Cli {
    /// TOML run configuration; fields mirror the resolved config written next to outputs.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for encoding and gradient chunks.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single thread and sequential gradient accumulation.
    #[arg(long, global = true)]
    serial: bool,
    /// Abort on unreadable input lines (default).
    #[arg(long, global = true, conflicts_with = "lenient")]
    strict: bool,
    /// Count and skip unreadable input lines.
    #[arg(long, global = true)]
    lenient: bool,
    /// Output directory; also where unset inputs are looked up.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a seeded synthetic corpus.
    Fixture {
        /// Number of records and annotation rows.
        #[arg(long)]
        size: Option<usize>,
    },
    /// Build the vocabulary from the training split.
    Vocab,
    /// Train the classifier.
    Train,
    /// Score the model on train, dev and test.
    Evaluate,
    /// Label reaction corpora.
    Predict,
    /// Compare trusted and deceptive sources.
    Analyze,
    /// Summarize metrics and analysis as markdown.
    Report,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let ingest_mode = if cli.lenient {
        Some(IngestMode::Lenient)
    } else if cli.strict {
        Some(IngestMode::Strict)
    } else {
        None
    };
    let overrides = Overrides {
        seed: cli.seed,
        threads: cli.threads,
        serial: cli.serial,
        ingest_mode,
        out: cli.out.clone(),
    };
    let mut cfg = base.resolve(&overrides)?;
    if let Command::Fixture { size: Some(n) } = cli.command {
        cfg.fixture.size = n;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve(cli)?;
    let threads = if cfg.serial { Some(1) } else { cfg.threads };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Fixture { .. } => commands::fixture(&cfg),
        Command::Vocab => commands::vocab(&cfg),
        Command::Train => commands::train(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::Predict => commands::predict(&cfg),
        Command::Analyze => commands::analyze(&cfg),
        Command::Report => commands::report(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
