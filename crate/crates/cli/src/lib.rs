//! Command-line front end for the convseq place-recognition pipeline.
//!
//! `main.rs` only parses arguments and maps errors to exit codes; everything
//! else lives here so integration tests can drive commands in-process.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod output;
pub mod settings;
pub mod source;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};
pub use manifest::RunManifest;
pub use settings::{Overrides, Settings};
pub use source::{DatasetSource, SourceArgs};

#[derive(Debug, Parser)]
#[command(name = "convseq", version, about = "Sequence-based visual place recognition benchmark")]
pub struct Cli {
    /// Worker threads for encoding and matching (default: all cores)
    #[arg(long, global = true, env = "CONVSEQ_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full pipeline and write report, PR curve, matches and manifest
    Benchmark(commands::benchmark::BenchmarkArgs),
    /// Fixed sequence length sweep over a k range
    Ablate(commands::ablate::AblateArgs),
    /// Sequence-length decisions for a query traverse
    Seqlens(commands::seqlens::SeqlensArgs),
    /// Write a seeded synthetic query/reference pair to disk
    GenSynthetic(commands::gen_synthetic::GenSyntheticArgs),
}

/// Options shared by the commands that read a dataset.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// TOML or JSON file of parameter overrides
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Reuse the configuration and dataset recorded by an earlier run
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[command(flatten)]
    pub overrides: Overrides,

    /// Output directory
    #[arg(long, short, default_value = "convseq-out")]
    pub out: PathBuf,
}

impl CommonArgs {
    /// Resolved settings and dataset source, honoring the precedence
    /// flags > config file > manifest > defaults.
    pub fn prepare(&self) -> Result<(Settings, DatasetSource)> {
        let manifest = self.manifest.as_deref().map(RunManifest::load).transpose()?;
        let base = manifest.as_ref().map(RunManifest::settings).unwrap_or_default();
        let settings = settings::resolve(base, self.config.as_deref(), &self.overrides)?;
        let source = self.source.resolve(manifest.as_ref().map(|m| &m.dataset))?;
        Ok((settings, source))
    }
}

/// Runs one command on a pool capped at `cli.threads`; returns the summary
/// meant for stdout.
pub fn run(cli: Cli) -> Result<String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Benchmark(a) => commands::benchmark::run(&a),
        Command::Ablate(a) => commands::ablate::run(&a),
        Command::Seqlens(a) => commands::seqlens::run(&a),
        Command::GenSynthetic(a) => commands::gen_synthetic::run(&a),
    })
}
