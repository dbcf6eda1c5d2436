mod config;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use monosplit::operators::GALLERY_NAMES;
use monosplit::problems::PROBLEM_NAMES;
use monosplit::splitting::bound_formula;
use monosplit::{Baseline, Method};

use experiment::{run_experiment, RunOptions, SEED_OVERRIDE_VAR};

#[derive(Parser)]
#[command(
    name = "monosplit",
    version,
    about = "Run monotone-inclusion splitting experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every method in a JSON experiment config.
    Run {
        config: PathBuf,
        /// Directory that relative output paths are resolved against.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        quiet: bool,
    },
    /// List problems, methods with their step-size bounds, and prox operators.
    Catalog,
}

fn catalog() -> String {
    let mut out = String::from("problems:\n");
    for name in PROBLEM_NAMES {
        out += &format!("  {name}\n");
    }
    out += "methods:\n";
    for m in Method::ALL {
        out += &format!("  {:<5} bound: {}\n", m.name(), bound_formula(m));
    }
    let baselines: Vec<&str> = Baseline::ALL
        .iter()
        .map(|b| Method::from(*b).name())
        .collect();
    out += &format!("baselines: {}\n", baselines.join(", "));
    out += "prox gallery:\n";
    for name in GALLERY_NAMES {
        out += &format!("  {name}\n");
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog => {
            print!("{}", catalog());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out_dir,
            quiet,
        } => {
            let opts = RunOptions {
                out_dir,
                quiet,
                seed_override: std::env::var(SEED_OVERRIDE_VAR).ok(),
            };
            match run_experiment(&config, &opts) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("monosplit: {e}");
                    ExitCode::from(e.exit_code())
                }
            }
        }
    }
}
