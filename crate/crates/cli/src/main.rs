mod config;
mod experiments;
mod record;
mod report;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dispersive_lab::spectral::write_snapshot;
use serde_json::json;

use config::{default_anchor, load_value, parse_typed, ConfigError};
use experiments::*;
use record::{new_id, write_atomic, RunRecord};

/// Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 configuration error.
#[derive(Parser)]
#[command(name = "dlab", version, about = "Strichartz, kernel-decay and contraction experiments on periodic grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Results directory.
    #[arg(long, env = "DLAB_OUT_DIR", default_value = "results")]
    out: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact exponent selection.
    Exponents(RunArgs),
    /// Strichartz quotients across dyadic bands.
    StrichartzScan(RunArgs),
    /// Decay slope of the frequency-localized kernel.
    KernelDecay(RunArgs),
    /// Phase Hessian ranks on random annulus samples.
    HessianScan(RunArgs),
    /// Nonlinear-estimate ratios on random trajectories.
    NonlinearCheck(RunArgs),
    /// Picard iteration on a fixed horizon.
    Solve(RunArgs),
    /// Search for a contracting horizon.
    Contraction(RunArgs),
    /// Rough tensor data under grid doubling.
    RoughData(RunArgs),
    /// Summarize all run records in a results directory.
    Report {
        #[arg(env = "DLAB_OUT_DIR", default_value = "results")]
        dir: PathBuf,
    },
}

fn run<E: Experiment>(args: &RunArgs) -> anyhow::Result<i32> {
    let value = load_value(&args.config, args.seed)?;
    let cfg: E = parse_typed(value)?;
    let outcome = cfg.run()?;

    std::fs::create_dir_all(&args.out)?;
    let id = new_id(E::NAME);
    let mut artifacts = Vec::new();
    if let Some(series) = &outcome.series {
        let name = format!("{id}.csv");
        write_atomic(&args.out, &name, &series.to_csv()?)?;
        artifacts.push(name);
    }
    if let Some(field) = &outcome.snapshot {
        let mut buf = Vec::new();
        write_snapshot(field, &mut buf)?;
        let name = format!("{id}.snap");
        write_atomic(&args.out, &name, &buf)?;
        artifacts.push(name);
    }
    let grid = outcome.grid.as_ref().map(|g| json!({ "axes": g.axes(), "split": g.split() }));
    let record = RunRecord {
        id: id.clone(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        subcommand: E::NAME.into(),
        anchor: default_anchor(&cfg.anchor().cloned(), E::ANCHOR),
        status: outcome.status,
        tolerance: outcome.tolerance,
        summary: outcome.summary,
        config: serde_json::to_value(&cfg)?,
        results: outcome.results,
        environment: json!({
            "version": env!("CARGO_PKG_VERSION"),
            "precision": "f64",
            "os": std::env::consts::OS,
            "arch": std::env::consts::ARCH,
            "grid": grid,
        }),
        artifacts,
    };
    let path = write_atomic(&args.out, &format!("{id}.json"), &serde_json::to_vec_pretty(&record)?)?;
    println!("[{}] {} {}: {}", record.status.as_str(), E::NAME, display(&path), record.summary);
    Ok(record.status.exit_code())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn dispatch(cmd: &Command) -> anyhow::Result<i32> {
    match cmd {
        Command::Exponents(a) => run::<ExponentsConfig>(a),
        Command::StrichartzScan(a) => run::<StrichartzScanConfig>(a),
        Command::KernelDecay(a) => run::<KernelDecayConfig>(a),
        Command::HessianScan(a) => run::<HessianScanConfig>(a),
        Command::NonlinearCheck(a) => run::<NonlinearCheckConfig>(a),
        Command::Solve(a) => run::<SolveConfig>(a),
        Command::Contraction(a) => run::<ContractionConfig>(a),
        Command::RoughData(a) => run::<RoughDataConfig>(a),
        Command::Report { dir } => report::report(dir),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match dispatch(&cli.command) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("{e}");
            3
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    };
    std::process::exit(code);
}
