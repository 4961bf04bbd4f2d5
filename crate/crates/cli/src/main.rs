//! `excl`: experiment runner for the `excl-core` library.
//!
//! Exit codes: 0 success, 1 an asserted check failed, 2 configuration or
//! I/O error. `EXCL_THREADS` caps the worker pool.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Config, Flags};

#[derive(Parser)]
#[command(name = "excl", version, about = "Exact and Monte Carlo studies of exclusion and chameleon processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Graph text file, or `gen:<kind>:<params>` (e.g. `gen:cycle:6`).
    #[arg(long)]
    graph: Option<String>,
    /// Configuration overrides as `key=value` (value parsed as JSON).
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact mixing times of rw, rw_k, ex_k and ip_k.
    ExactMix(Common),
    /// Empirical law of a process from the graphical construction.
    Simulate(Common),
    /// Chameleon identity, first-contact claim and one recorded trace.
    ChameleonCheck(Common),
    /// Conditioned ink-chain decay profile.
    InkChain(Common),
    /// Meeting-time tails of two independent walkers.
    Meeting(Common),
    /// Easy-graph verdict.
    EasyTest(Common),
    /// Path congestion against its lower bound.
    PhiBound(Common),
    /// Red decay over one round and the first depinking tail.
    RedDecay(Common),
    /// Acceptance criteria.
    Verify {
        #[command(flatten)]
        common: Common,
        /// `all` or a comma-separated list of criterion ids.
        #[arg(long)]
        suite: Option<String>,
    },
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("EXCL_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("EXCL_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("EXCL_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let (name, common, suite) = match cli.command {
        Command::ExactMix(c) => ("exact-mix", c, None),
        Command::Simulate(c) => ("simulate", c, None),
        Command::ChameleonCheck(c) => ("chameleon-check", c, None),
        Command::InkChain(c) => ("ink-chain", c, None),
        Command::Meeting(c) => ("meeting", c, None),
        Command::EasyTest(c) => ("easy-test", c, None),
        Command::PhiBound(c) => ("phi-bound", c, None),
        Command::RedDecay(c) => ("red-decay", c, None),
        Command::Verify { common, suite } => ("verify", common, suite),
    };
    let mut flags = Flags {
        config: common.config,
        seed: common.seed,
        trials: common.trials,
        out: common.out,
        graph: common.graph,
        overrides: common.overrides,
    };
    if let Some(s) = suite {
        flags.overrides.push(format!("suite=\"{s}\""));
    }
    let cfg = match Config::resolve(&flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    match commands::run(name, &cfg) {
        Ok(report) => {
            for f in &report.files {
                println!("wrote {f}");
            }
            if report.failed {
                eprintln!("assertion failed");
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
