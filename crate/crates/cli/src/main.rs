//! `qbm <command> --config <scenario.toml> [--out <dir>]`

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use qbm_cli::{run, CliError, Command};

#[derive(Parser)]
#[command(name = "qbm", version, about = "Quantum Brownian motion scenarios to CSV")]
struct Args {
    command: Command,
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io {
            path: args.config.display().to_string(),
            message: e.to_string(),
        })
        .and_then(|text| {
            let base = args.config.parent().unwrap_or(Path::new("."));
            run(Some(args.command), &text, base, &args.out)
        });
    match outcome {
        Ok(summary) => {
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!("wrote {} rows to {}", summary.rows, summary.csv.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
