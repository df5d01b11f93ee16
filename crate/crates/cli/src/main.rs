use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

use tensornet_cli::config::{parse_config_for, Command};
use tensornet_cli::run::{emit, run};
use tensornet_cli::verify::Suite;
use tensornet_cli::CliError;

#[derive(Parser)]
#[command(name = "tnet", version, about = "Tensor-network experiments for spin chains and the 2D Ising model")]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; `-` writes to standard output.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Exact diagonalization.
    Ed,
    /// Imaginary-time TEBD ground state.
    Tebd,
    /// TRG free energy of the square-lattice Ising model.
    Trg,
    /// Compress the exact ground state into an MPS.
    MpsInfo,
    /// Transfer-matrix correlation length of the TEBD ground state.
    Corr,
    /// Run whatever command the config names.
    Run,
    /// Run an acceptance suite: core, mps, tebd, trg or all.
    Verify { suite: Option<String> },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (command, suite) = match &cli.command {
        Sub::Ed => (Some(Command::Ed), None),
        Sub::Tebd => (Some(Command::Tebd), None),
        Sub::Trg => (Some(Command::Trg), None),
        Sub::MpsInfo => (Some(Command::MpsInfo), None),
        Sub::Corr => (Some(Command::Corr), None),
        Sub::Run => (None, None),
        Sub::Verify { suite } => (Some(Command::Verify), suite.clone()),
    };
    if let Some(s) = &suite {
        s.parse::<Suite>().map_err(CliError::Usage)?;
    }
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?,
        None if command.is_some() => "{}".to_string(),
        None => return Err(CliError::Usage("`run` needs --config".into())),
    };
    let mut config = parse_config_for(&text, command)?;
    if let Some(s) = suite {
        config.algorithm.suite = s;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = cli.output {
        config.output.path = Some(out);
    }
    let out = run(&config)?;
    if config.command == Command::Verify {
        if let Some(list) = out.record.metrics.get("criteria").and_then(|v| v.as_array()) {
            for c in list {
                let passed = c["passed"].as_bool().unwrap_or(false);
                eprintln!(
                    "[{}] criterion {:>2} {} {}",
                    if passed { "PASS" } else { "FAIL" },
                    c["id"],
                    c["name"].as_str().unwrap_or(""),
                    c["detail"].as_str().unwrap_or("")
                );
            }
        }
    }
    emit(&out, &config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tnet: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{}", Cli::command().render_usage());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
