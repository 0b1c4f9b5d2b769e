use clap::{Parser, Subcommand};
use gaugefem::cli;
use gaugefem::config::{parse_config, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Yang-Mills finite element simulator with charge-conserving hybrid
/// post-processing.
#[derive(Parser)]
#[command(name = "gaugefem", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation and write CSV diagnostics plus a plot script.
    Run {
        /// Plain-text key = value configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the built-in invariant suite and print a pass/fail table.
    Selftest,
    /// Print the effective configuration.
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<RunConfig, gaugefem::Error> {
    match path {
        Some(p) => parse_config(&std::fs::read_to_string(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match args.command {
        Command::Run { config, output_dir } => {
            let mut cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir;
            }
            match cli::cmd_run(&cfg) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(cli::exit_code(&e) as u8)
                }
            }
        }
        Command::Selftest => {
            if cli::cmd_selftest() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Command::PrintConfig { config } => match load_config(&config) {
            Ok(cfg) => {
                cli::cmd_print_config(&cfg);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
