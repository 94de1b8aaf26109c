//! `toda-tau`: batch front end for the tau-function, kernel and Fock-space checks.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 an identity or adjudication failed beyond its tolerance.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toda_tau::Error;

use crate::commands::Report;
use crate::config::{ConfigError, Overrides, RunConfig};

#[derive(Parser)]
#[command(name = "toda-tau", version, about = "Fredholm tau-functions, Schur-measure kernels and Toda checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dump a window of the correlation kernel.
    Kernel,
    /// tau_n with its truncation bound.
    Tau,
    /// Gap probability P(lambda_1 <= n).
    Gap,
    /// Enumeration oracles: correlations, gaps, multiplicative expectations.
    Bruteforce,
    /// Fock-space operator audit suite.
    FockCheck,
    /// Hirota residual suite.
    Hirota,
    /// Weight-family and charge-sign adjudications.
    Adjudicate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Kernel => "kernel",
            Command::Tau => "tau",
            Command::Gap => "gap",
            Command::Bruteforce => "bruteforce",
            Command::FockCheck => "fock-check",
            Command::Hirota => "hirota",
            Command::Adjudicate => "adjudicate",
        }
    }

    fn run(self, cfg: &RunConfig) -> toda_tau::Result<Report> {
        match self {
            Command::Kernel => commands::kernel(cfg),
            Command::Tau => commands::tau(cfg),
            Command::Gap => commands::gap(cfg),
            Command::Bruteforce => commands::bruteforce(cfg),
            Command::FockCheck => commands::fock_check(cfg),
            Command::Hirota => commands::hirota(cfg),
            Command::Adjudicate => commands::adjudicate(cfg),
        }
    }
}

const CONFIG_ERROR: u8 = 2;
const NUMERIC_ERROR: u8 = 3;
const MISMATCH: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Numeric(_) => NUMERIC_ERROR,
        _ => CONFIG_ERROR,
    }
}

fn emit(cfg: &RunConfig, report: &Report) -> io::Result<()> {
    let mut out: Box<dyn Write> = match &cfg.output {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    for r in &report.records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    if let (Some(path), Some(csv)) = (&cfg.csv, &report.csv) {
        std::fs::write(path, csv)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    let cfg = match cli.overrides.resolve(cli.command.name()) {
        Ok(cfg) => cfg,
        Err(ConfigError(msg)) => {
            eprintln!("config error: {msg}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let report = match cli.command.run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{}: {e}", cli.command.name());
            return ExitCode::from(exit_code(&e));
        }
    };
    if let Err(e) = emit(&cfg, &report) {
        eprintln!("cannot write output: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    match &report.mismatch {
        Some(msg) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(MISMATCH)
        }
        None => ExitCode::SUCCESS,
    }
}
