use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vpmcf::cli_io::{self, Outcome};

#[derive(Parser)]
#[command(name = "vpmcf", version, about = "Phase-field volume-preserving mean curvature flow on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a scenario and write diagnostics and snapshots.
    Run { config: PathBuf },
    /// Run an epsilon sweep and evaluate its trend assertions.
    Sweep { config: PathBuf },
    /// Evaluate the Brakke ledger over the snapshots of a finished run.
    CheckBrakke { config: PathBuf, dir: PathBuf },
    /// Compare interface snapshots with the circle oracle.
    OracleCompare { config: PathBuf, dir: PathBuf },
}

fn execute(cli: Cli) -> vpmcf::Result<Outcome> {
    cli_io::init_threads()?;
    match cli.command {
        Command::Run { config } => cli_io::cmd_run(&cli_io::load_config(&config)?),
        Command::Sweep { config } => cli_io::cmd_sweep(&cli_io::load_config(&config)?),
        Command::CheckBrakke { config, dir } => cli_io::cmd_check_brakke(&cli_io::load_config(&config)?, &dir),
        Command::OracleCompare { config, dir } => cli_io::cmd_oracle_compare(&cli_io::load_config(&config)?, &dir),
    }
}

/// 0 when the command's assertions hold, 1 when they fail, 2 on error.
fn exit_code(result: &vpmcf::Result<Outcome>) -> u8 {
    match result {
        Ok(out) if out.pass => 0,
        Ok(_) => 1,
        Err(_) => 2,
    }
}

fn main() -> ExitCode {
    let result = execute(Cli::parse());
    match &result {
        Ok(out) => {
            for a in &out.artifacts {
                println!("wrote {}", a.display());
            }
            println!("{}", out.summary);
            if !out.pass {
                eprintln!("assertions failed");
            }
        }
        Err(e) => eprintln!("{}", cli_io::error_json(e)),
    }
    ExitCode::from(exit_code(&result))
}
