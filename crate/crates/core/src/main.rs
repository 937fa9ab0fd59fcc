use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use featforge::controller;

/// Text feature extraction and classification workbench.
#[derive(Parser)]
#[command(name = "featforge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// List registered feature extractors.
    ListFeatures,
    /// List registered classifiers.
    ListClassifiers,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match controller::run(&config) {
            Ok(report) => {
                print!("{}", report.to_text());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("featforge: {e}");
                ExitCode::from(e.exit_code() as u8)
            }
        },
        Command::ListFeatures => {
            print!("{}", controller::list_features());
            ExitCode::SUCCESS
        }
        Command::ListClassifiers => {
            print!("{}", controller::list_classifiers());
            ExitCode::SUCCESS
        }
    }
}
