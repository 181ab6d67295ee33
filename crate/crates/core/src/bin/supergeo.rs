use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "supergeo", version, about = "Exact symbolic checks on semi-Riemannian supermanifolds")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and emit its report.
    Run {
        scenario: PathBuf,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Recorded in the report header.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run { scenario, report, seed } => {
            let out = supergeo::scenario::run_scenario(&scenario, seed);
            match report {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &out.report) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    let summary = out.report.lines().find(|l| l.starts_with("summary:") || l.starts_with("parse error"));
                    if let Some(line) = summary {
                        eprintln!("{line}");
                    }
                }
                None => print!("{}", out.report),
            }
            ExitCode::from(out.exit_code as u8)
        }
    }
}
