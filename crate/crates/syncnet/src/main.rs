use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use syncnet::commands::{self, CliError};
use syncnet::config::{parse_config, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Analyze,
    Simulate,
    Critical,
    Sweep,
    Persistence,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Analyze => Command::Analyze,
            Cmd::Simulate => Command::Simulate,
            Cmd::Critical => Command::Critical,
            Cmd::Sweep => Command::Sweep,
            Cmd::Persistence => Command::Persistence,
        }
    }
}

/// Synchronisation analysis and simulation of coupled dynamical networks.
#[derive(Debug, Parser)]
#[command(name = "syncnet", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run seed, overriding `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let code = match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

fn run(args: &Args) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.clone(),
        source,
    })?;
    let mut cfg = parse_config(&text, Some(args.command.into()))?;
    if let Some(seed) = args.seed {
        cfg.set_seed(seed);
    }
    if let Some(out) = &args.out {
        cfg.set_output_dir(out.to_string_lossy().into_owned());
    }
    let outcome = commands::run(&cfg)?;
    if !args.quiet {
        let dir = cfg.output().dir.clone().unwrap_or_default();
        for f in &outcome.files {
            println!("wrote {}", PathBuf::from(&dir).join(f).display());
        }
    }
    if let Some(msg) = &outcome.failure {
        eprintln!("error: {msg}");
    }
    Ok(outcome.exit_code())
}
