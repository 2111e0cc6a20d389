mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use curvelab_core::Error;
use config::RunConfig;

#[derive(Parser)]
#[command(name = "curvelab", version, about = "Curvature functionals, beta numbers and net-graph tours")]
struct Cli {
    /// JSON file with default options; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated input (curve CSV, point CSV or metric JSON).
    Generate(RunConfig),
    /// Multiresolution nets and ball family.
    Nets(RunConfig),
    /// Jones beta numbers over the ball family.
    Beta(RunConfig),
    /// Triangle excess and Menger curvature of one triple.
    Curvature(RunConfig),
    /// Evaluate a curvature functional.
    Verify(RunConfig),
    /// Net graph, doubled Euler tour and closed parameterization.
    Tour(RunConfig),
    /// Full pipeline: nets, functionals, optional tour.
    Report(RunConfig),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Usage(_) | Error::Domain(_) | Error::Unsupported(_) => 2,
        Error::Disconnected { .. } => 4,
        Error::Validation(_) | Error::Io(_) | Error::Json(_) | Error::Csv(_) => 3,
    }
}

fn error_record(e: &Error) -> serde_json::Value {
    let mut rec = json!({ "kind": e.kind(), "message": e.to_string() });
    if let Error::Disconnected { first, second, gap, threshold } = e {
        rec["first"] = json!(first);
        rec["second"] = json!(second);
        rec["gap"] = json!(gap);
        rec["threshold"] = json!(threshold);
    }
    json!({ "error": rec })
}

fn run(cli: Cli) -> curvelab_core::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    }
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    type Handler = fn(&RunConfig) -> curvelab_core::Result<()>;
    let (name, cmd, flags): (&str, Handler, RunConfig) = match cli.command {
        Command::Generate(c) => ("generate", commands::generate_cmd, c),
        Command::Nets(c) => ("nets", commands::nets_cmd, c),
        Command::Beta(c) => ("beta", commands::beta_cmd, c),
        Command::Curvature(c) => ("curvature", commands::curvature_cmd, c),
        Command::Verify(c) => ("verify", commands::verify_cmd, c),
        Command::Tour(c) => ("tour", commands::tour_cmd, c),
        Command::Report(c) => ("report", commands::report_cmd, c),
    };
    let cfg = flags.over(file);
    cfg.validate()?;
    cmd(&cfg.resolved(name))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(exit_code(&e))
        }
    }
}
