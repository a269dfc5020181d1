//! Batch front end: `simons <command> --config <path> [--out-dir <path>] [--verbose]`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed or a computation could not
//! be completed, 2 invalid configuration, 3 I/O failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{validate_config, Command};

#[derive(Debug, Parser)]
#[command(
    name = "simons",
    version,
    about = "Simons cone stability and calibration runs"
)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out_dir` in the configuration.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };

    let raw = match std::fs::read_to_string(&cli.config) {
        Ok(raw) => raw,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(EXIT_IO);
        }
    };
    let mut config = match validate_config(&raw, cli.command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(dir) = cli.out_dir {
        config.out_dir = dir;
    }

    let (report, tables) = match run::run(&config, cli.verbose) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CHECK);
        }
    };
    let json = match serde_json::to_vec_pretty(&report) {
        Ok(mut j) => {
            j.push(b'\n');
            j
        }
        Err(e) => {
            eprintln!("error: cannot serialize report: {e}");
            return ExitCode::from(EXIT_IO);
        }
    };
    match output::write_outputs(&config.out_dir, &json, &tables) {
        Ok(paths) if cli.verbose => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
        }
        Ok(_) => {}
        Err(e) => {
            eprintln!(
                "error: cannot write outputs to {}: {e}",
                config.out_dir.display()
            );
            return ExitCode::from(EXIT_IO);
        }
    }

    for c in &report.checks {
        println!(
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK)
    }
}
