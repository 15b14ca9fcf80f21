//! `spoofeval` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "spoofeval", version, about = "Spoofing countermeasure evaluation toolkit")]
struct Cli {
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract CQCC or LFCC features for a list of WAV files.
    Features(commands::features::Args),
    /// Train one class GMM from extracted features.
    TrainGmm(commands::gmm::TrainArgs),
    /// Score trials as bona fide vs spoof log-likelihood ratios.
    ScoreCm(commands::gmm::ScoreArgs),
    /// Pooled and per-condition min t-DCF of a CM score file.
    Evaluate(commands::evaluate::Args),
    /// Train, apply or average score-level fusion.
    #[command(subcommand)]
    Fuse(commands::fuse::FuseCommand),
    /// Greedy oracle fusion sweep over ensemble size.
    OracleSweep(commands::fuse::SweepArgs),
}

/// Common `--config` flag.
#[derive(clap::Args, Debug, Clone, Default)]
pub struct ConfigArg {
    /// `key = value` configuration file with [section] headers.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Features(a) => commands::features::run(a),
        Command::TrainGmm(a) => commands::gmm::train(a),
        Command::ScoreCm(a) => commands::gmm::score(a),
        Command::Evaluate(a) => commands::evaluate::run(a),
        Command::Fuse(c) => commands::fuse::run(c),
        Command::OracleSweep(a) => commands::fuse::sweep(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
