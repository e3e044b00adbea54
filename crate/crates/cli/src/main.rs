//! `fasep`: seeded experiments, exact solutions and the acceptance suite for
//! facilitated exclusion.

mod commands;
mod fail;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::fail::CliError;
use crate::output::Output;
use crate::spec::ExperimentSpec;

#[derive(Parser, Debug)]
#[command(name = "fasep", version, about = "Facilitated exclusion experiments")]
struct Cli {
    /// TOML or JSON experiment file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Reduced sample sizes.
    #[arg(long, global = true)]
    quick: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run trajectories, one JSON line per seed and rate.
    Simulate(ExperimentSpec),
    /// Exact absorption or stationary laws on a small ring.
    Exact(ExperimentSpec),
    /// Plain exclusion coupled with its substituted facilitated image.
    Couple(ExperimentSpec),
    /// Gap statistics of frozen insulated windows.
    Gaps(ExperimentSpec),
    /// Stationary cylinder frequencies on a large ring.
    Cylinders(ExperimentSpec),
    /// Run the acceptance criteria.
    Verify(ExperimentSpec),
}

impl Command {
    fn split(self) -> (&'static str, ExperimentSpec) {
        match self {
            Command::Simulate(s) => ("simulate", s),
            Command::Exact(s) => ("exact", s),
            Command::Couple(s) => ("couple", s),
            Command::Gaps(s) => ("gaps", s),
            Command::Cylinders(s) => ("cylinders", s),
            Command::Verify(s) => ("verify", s),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => ExperimentSpec::load(path)?,
        None => ExperimentSpec::default(),
    };
    let mut flags = match cli.command {
        Some(c) => {
            let (name, mut s) = c.split();
            s.command = Some(name.into());
            s
        }
        None => ExperimentSpec::default(),
    };
    flags.seed = cli.seed;
    flags.out_dir = cli.out_dir;
    flags.quick = cli.quick;
    let spec = file.overlay(flags);
    let command = spec
        .command
        .clone()
        .ok_or_else(|| CliError::Spec("no subcommand given on the command line or in the config".into()))?;
    let dir = spec.out_dir.clone().unwrap_or_else(|| PathBuf::from("fasep-out"));
    let mut out = Output::new(&dir, &spec)?;
    match command.as_str() {
        "simulate" => commands::simulate(&spec, &mut out),
        "exact" => commands::exact(&spec, &mut out),
        "couple" => commands::couple(&spec, &mut out),
        "gaps" => commands::gaps(&spec, &mut out),
        "cylinders" => commands::cylinders(&spec, &mut out),
        "verify" => commands::verify(&spec, &mut out),
        other => Err(CliError::Spec(format!("unknown command `{other}`"))),
    }?;
    for path in &out.written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
