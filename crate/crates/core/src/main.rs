use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use moment_lyapunov::cli::{run, RunOptions, Subcommand};

/// Moment Lyapunov exponent experiments.
#[derive(Parser)]
#[command(name = "mlyap", version)]
struct Args {
    /// One of lambda-mc, lambda-spectral, bounds, growth-check, rate-function,
    /// clt, mdp, asymptotics, crosscheck, repro.
    subcommand: String,
    /// Experiment name for `repro`; model and `key=value` overrides for `crosscheck`.
    args: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `[mc] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let a = Args::parse();
    let Some(sub) = Subcommand::parse(&a.subcommand) else {
        eprintln!("unknown subcommand `{}`", a.subcommand);
        return ExitCode::from(2);
    };
    let opts = RunOptions { config: a.config, out: a.out, seed: a.seed, threads: a.threads, args: a.args };
    match run(sub, &opts, &mut std::io::stdout()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
