// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! `goldfish`: batch runner for the identity, flow, separation and
//! superintegrability experiments.

mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;
use crate::report::Report;

#[derive(Debug, Parser)]
#[command(name = "goldfish", version, about = "Verification and flow experiments for goldfish-type integrable systems")]
struct Cli {
    /// JSON experiment config.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress the per-check summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bracket identity battery over seeded random states.
    Verify,
    /// Integrate a flow, write the trajectory and compare with exact solvers.
    Simulate,
    /// Separation constants and their conservation along the flow.
    Separate,
    /// Superintegrals and the Jacobian rank.
    Superint,
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config <PATH> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let report_path = report_path(cli, &cfg);
    log::info!("running {:?} with {} (n = {})", cli.command, cfg.family.name, cfg.n);
    match cli.command {
        Command::Verify => commands::verify(cfg),
        Command::Simulate => commands::simulate(cfg, report_path.as_deref()),
        Command::Separate => commands::separate(cfg),
        Command::Superint => commands::superint(cfg),
    }
}

fn report_path(cli: &Cli, cfg: &ExperimentConfig) -> Option<PathBuf> {
    cli.output
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()))
}

fn emit(report: &Report, path: Option<PathBuf>, format: Format) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match format {
        Format::Json => buf.extend_from_slice(report.to_json().as_bytes()),
        Format::Csv => report.write_csv(&mut buf)?,
    }
    match path {
        Some(p) => std::fs::write(&p, buf).map_err(|e| CliError::io(p.display(), e)),
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::io("stdout", e)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("GOLDFISH_LOG")).init();
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("goldfish: {e}");
            return e.exit_code();
        }
    };
    let format = cli
        .format
        .or_else(|| report.config.output.as_ref().map(|o| o.format))
        .unwrap_or_default();
    if let Err(e) = emit(&report, report_path(&cli, &report.config), format) {
        eprintln!("goldfish: {e}");
        return e.exit_code();
    }
    if !cli.quiet {
        eprint!("{}", report.summary());
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
