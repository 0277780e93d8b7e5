use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oplab::cli::{self, fuzz::FuzzConfig, fuzz::Theorems, AnalyzeOptions, CommandOutput};

#[derive(Parser)]
#[command(name = "oplab", version, about = "Composition operators on Orlicz and Orlicz-Sobolev spaces")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a transformation on an atomic measure space.
    Analyze {
        scenario: PathBuf,
        /// Print the JSON report instead of text.
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to this file.
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
    },
    /// Luxemburg norm (and Orlicz-Sobolev norm on grids) of the scenario's function.
    Norm {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        json: bool,
    },
    /// Chain rule, boundedness and kernel checks on a grid scenario.
    Verify {
        scenario: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Compare the theorem procedures with brute-force oracles on random instances.
    Fuzz {
        #[arg(long, env = "OPLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 10)]
        max_atoms: usize,
        #[arg(long)]
        max_k: Option<usize>,
        /// Where to write the first counterexample, if any.
        #[arg(long, value_name = "FILE", default_value = "counterexample.json")]
        counterexample: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let out: CommandOutput = match args.command {
        Command::Analyze { scenario, json, report } => {
            cli::cmd_analyze(&scenario, &AnalyzeOptions { json, report })
        }
        Command::Norm { scenario, tol, json } => cli::cmd_norm(&scenario, tol, json),
        Command::Verify { scenario, json } => cli::cmd_verify(&scenario, json),
        Command::Fuzz {
            seed,
            instances,
            max_atoms,
            max_k,
            counterexample,
        } => {
            let config = FuzzConfig {
                seed,
                instances,
                max_atoms,
                max_k,
            };
            cli::cmd_fuzz(&config, &counterexample, &Theorems)
        }
    };
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.exit_code as u8)
}
