pub mod absapprox;
pub mod common;
pub mod conformal;
pub mod deflate;
pub mod ensemble;
pub mod fit;
pub mod losssurface;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::error::{CliError, CliResult};
use crate::output::Outcome;
use crate::record::RunRecord;

#[derive(Debug, Parser)]
#[command(name = "deeppoly", version, about = "Deep (composite) polynomial approximation experiments")]
pub struct Cli {
    /// Worker threads for independent trials.
    #[arg(long, global = true, env = "DEEPPOLY_THREADS")]
    pub threads: Option<usize>,
    /// Directory for run.json and the CSV tables.
    #[arg(long, global = true, default_value = "out")]
    pub outdir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random-restart fit of a composite polynomial.
    Fit(fit::FitArgs),
    /// Relative error across the inner/outer degree splits of a fixed budget.
    Sweep(sweep::SweepArgs),
    /// Many-trial fit with error histogram and minimizer clusters.
    Ensemble(ensemble::EnsembleArgs),
    /// Deflation search for further minima from one start.
    Deflate(deflate::DeflateArgs),
    /// Newton-iteration composites approximating |x|.
    Absapprox(absapprox::AbsApproxArgs),
    /// Mapped equispaced interpolation of the Runge function.
    Conformal(conformal::ConformalArgs),
    /// Loss of the two-parameter coupled model on a grid.
    Losssurface(losssurface::LossSurfaceArgs),
    /// Repeat a recorded run and compare result payloads.
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RerunArgs {
    /// A run.json written by an earlier command.
    pub record: PathBuf,
    /// Exit non-zero when the new result differs from the recorded one.
    #[arg(long)]
    pub check: bool,
}

fn config_of<C: DeserializeOwned>(record: &RunRecord) -> CliResult<C> {
    serde_json::from_value(record.config.clone())
        .map_err(|e| CliError::Config(format!("{} config in record: {e}", record.subcommand)))
}

/// Runs a record's configuration again.
pub fn replay(record: &RunRecord) -> CliResult<Outcome> {
    match record.subcommand.as_str() {
        "fit" => fit::run(&config_of(record)?),
        "sweep" => sweep::run(&config_of(record)?),
        "ensemble" => ensemble::run(&config_of(record)?),
        "deflate" => deflate::run(&config_of(record)?),
        "absapprox" => absapprox::run(&config_of(record)?),
        "conformal" => conformal::run(&config_of(record)?),
        "losssurface" => losssurface::run(&config_of(record)?),
        other => Err(CliError::Config(format!("unknown subcommand `{other}` in record"))),
    }
}

/// Executes one command; the outcome is not yet written.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let threads = cli.threads;
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    match &cli.command {
        Command::Fit(a) => fit::run(&a.config(threads)),
        Command::Sweep(a) => sweep::run(&a.config(threads)),
        Command::Ensemble(a) => ensemble::run(&a.config(threads)),
        Command::Deflate(a) => deflate::run(&a.config(threads)?),
        Command::Absapprox(a) => absapprox::run(&a.config()),
        Command::Conformal(a) => conformal::run(&a.config()),
        Command::Losssurface(a) => losssurface::run(&a.config()),
        Command::Rerun(a) => {
            let old = RunRecord::read(&a.record)?;
            let new = replay(&old)?;
            if a.check && new.record.result_bytes() != old.result_bytes() {
                // write what was produced before reporting
                new.write(&cli.outdir)?;
                return Err(CliError::Mismatch(format!("result of {} differs from the record", a.record.display())));
            }
            Ok(new)
        }
    }
}
