//! `digcl`: train, evaluate and inspect directed-graph contrastive encoders.

mod commands;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use commands::{EntropyArgs, EvalArgs, SbmArgs, TrainArgs, WalksArgs};

#[derive(Debug, Parser)]
#[command(name = "digcl", version, about = "Dual-view contrastive learning on directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train an encoder and write a checkpoint directory.
    Train(TrainArgs),
    /// Evaluate a checkpoint on node classification or a link task.
    Eval(EvalArgs),
    /// Spectrum and Von Neumann entropy of a magnetic Laplacian.
    Entropy(EntropyArgs),
    /// Sample BFS/DFS-mode walks and dump them.
    Walks(WalksArgs),
    /// Generate a two-block directed SBM dataset.
    Sbm(SbmArgs),
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DIGCL_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("DIGCL_THREADS must be a positive integer, got `{raw}`"))?;
    if threads == 0 {
        return Err("DIGCL_THREADS must be at least 1".into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(1);
    }
    let result = match cli.command {
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Entropy(args) => commands::entropy(args),
        Command::Walks(args) => commands::walks(args),
        Command::Sbm(args) => commands::sbm(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
