//! `miao`: competitive-influence analysis of project activity series.

mod analyze;
mod ingest;
mod report;
mod rundir;
mod settings;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "miao", version, about = "Mutual impact analysis of open-source project activity")]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// More log output; repeat for debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build daily activity series from commit logs or CSVs.
    Ingest(ingest::IngestArgs),
    /// Score every group of a manifest.
    Analyze(analyze::AnalyzeArgs),
    /// Score, then classify REV groups with leave-one-out validation.
    Evaluate(analyze::EvaluateArgs),
    /// Generate synthetic series and their exact responses.
    Simulate(simulate::SimulateArgs),
    /// Summary tables and plot data for a finished run.
    Report(report::ReportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let config = cli.config.as_deref();
    let result = match &cli.command {
        Command::Ingest(a) => ingest::run(a),
        Command::Analyze(a) => analyze::run_analyze(a, config, cli.threads),
        Command::Evaluate(a) => analyze::run_evaluate(a, config, cli.threads),
        Command::Simulate(a) => simulate::run(a, config),
        Command::Report(a) => report::run(a),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
