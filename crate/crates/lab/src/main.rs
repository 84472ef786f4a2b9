use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpsq::experiments::CATALOG;
use lpsq::runner::{self, RunSummary};
use lpsq::{ExperimentConfig, LabError};

/// Littlewood-Paley square-function laboratory.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments named in a flat `key = value` config file.
    Run { config: PathBuf },
    /// Print the built-in experiments and the claim each one tests.
    List,
    /// Run every experiment at its default parameters.
    Smoke {
        #[arg(long, default_value = "smoke-out")]
        output: PathBuf,
    },
}

const OK: u8 = 0;
const VERDICT_FAILED: u8 = 1;
const CONFIG_OR_IO: u8 = 2;

fn finish(result: Result<RunSummary, LabError>) -> ExitCode {
    match result {
        Ok(s) => {
            for v in &s.report.verdicts {
                let tag = match v.outcome {
                    lpsq_core::estimate::Outcome::Pass => "pass",
                    lpsq_core::estimate::Outcome::Fail => "FAIL",
                    lpsq_core::estimate::Outcome::Exploratory => "info",
                };
                println!("{tag:4} {:24} observed {:<12.6e} {}", v.experiment, v.observed, v.citation);
            }
            for f in &s.failures {
                println!("ERR  {:24} {}", f.experiment, f.error);
            }
            for path in &s.files {
                println!("wrote {}", path.display());
            }
            ExitCode::from(if s.passed() { OK } else { VERDICT_FAILED })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_OR_IO)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for e in CATALOG {
                println!("{:24} {}", e.name, e.citation);
            }
            ExitCode::from(OK)
        }
        Command::Run { config } => {
            let names = lpsq::experiments::names();
            finish(ExperimentConfig::from_file(&config, &names).and_then(|c| runner::run(&c)))
        }
        Command::Smoke { output } => finish(runner::run(&runner::smoke_config(output))),
    }
}
