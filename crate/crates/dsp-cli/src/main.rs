use dsp_cli::commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "dsp", version, about = "Draft-sketch-prove workflow runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a plan over a benchmark and persist attempt records.
    Prove {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        /// Output directory (overrides the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Model backend: live or replay (overrides the config).
        #[arg(long)]
        mode: Option<String>,
        /// Plan name from the config (default: the first plan).
        #[arg(long)]
        plan: Option<String>,
        /// Skip statements and attempts with records already in the store.
        #[arg(long)]
        resume: bool,
        /// Override every stage's attempt budget.
        #[arg(long)]
        k: Option<u64>,
        /// Per-attempt wall-clock budget, seconds.
        #[arg(long)]
        deadline_secs: Option<u64>,
    },
    /// Repair a sketch: apply error-line masking from a diagnostics file,
    /// or run the full repair loop against the configured verifier.
    Mask {
        /// Sketch source file.
        #[arg(long)]
        sketch: PathBuf,
        /// JSON diagnostics (array of {line, column, severity, message}).
        #[arg(long, conflicts_with = "verify")]
        diagnostics: Option<PathBuf>,
        /// Verify-and-mask to a fixed point with the configured verifier.
        #[arg(long, requires = "config")]
        verify: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Compute metrics over an attempt store and emit report files.
    Report {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        benchmark: PathBuf,
        /// Directory for report.txt / report.json (default: store's parent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .init();

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prove {
            config,
            benchmark,
            out,
            mode,
            plan,
            resume,
            k,
            deadline_secs,
        } => commands::prove::run(commands::prove::ProveArgs {
            config,
            benchmark,
            out,
            mode,
            plan,
            resume,
            k,
            deadline_secs,
        }),
        Command::Mask {
            sketch,
            diagnostics,
            verify,
            config,
        } => commands::mask::run(sketch, diagnostics, verify, config),
        Command::Report { store, benchmark, out } => {
            commands::report::run(store, benchmark, out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
