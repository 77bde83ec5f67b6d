//! `sre`: solve, analyze, cut and disentangle finite spin chains, and run
//! the randomized verification suites.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use output::Output;

#[derive(Parser)]
#[command(name = "sre", version, about = "Short-range entanglement lab for finite spin chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state, gap and gap-condition check.
    Solve(Common),
    /// Clustering, mutual correlation and Schmidt curves.
    Analyze(Common),
    /// Cutting unitary at one bond.
    Cut(Common),
    /// Full disentangling circuit.
    Disentangle(Common),
    /// Randomized fidelity, filter and swap suites.
    VerifyAppendix(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Degenerate(String),
    Solver(String),
    Step(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Degenerate(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Step(_) => 4,
            Failure::Verification(_) => 5,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Degenerate(m) => write!(f, "degenerate ground space: {m}"),
            Failure::Solver(m) => write!(f, "solver error: {m}"),
            Failure::Step(m) => write!(f, "pipeline step failed: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

type Runner = fn(&RunConfig, &Output) -> Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common, run): (&'static str, Common, Runner) = match cli.command {
        Command::Solve(c) => ("solve", c, commands::solve),
        Command::Analyze(c) => ("analyze", c, commands::analyze),
        Command::Cut(c) => ("cut", c, commands::cut),
        Command::Disentangle(c) => ("disentangle", c, commands::disentangle_chain),
        Command::VerifyAppendix(c) => ("verify-appendix", c, commands::verify_appendix),
    };
    let cfg = match RunConfig::load(&common.config, common.seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("sre {name}: {e}");
            return ExitCode::from(e.code());
        }
    };
    let out = match Output::new(&common.out, name, &cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("sre {name}: {e}");
            return ExitCode::from(e.code());
        }
    };
    let result = run(&cfg, &out);
    let code = result.as_ref().err().map_or(0, Failure::code);
    if let Err(e) = &result {
        eprintln!("sre {name}: {e}");
    }
    if let Err(e) = out.meta(&common.config, i32::from(code)) {
        eprintln!("sre {name}: {e}");
    }
    println!("{}", out.path(".json").display());
    ExitCode::from(code)
}
