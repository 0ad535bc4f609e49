use clap::Args;
use deeppoly::optimizer::{parameter_sweep, SweepTable};
use deeppoly::{OptimizerConfig, Target};
use serde::{Deserialize, Serialize};

use super::common::{rule, OptimizerArgs, QuadArgs};
use crate::error::{CliError, CliResult};
use crate::output::{num, Outcome, Table};
use crate::record::RunRecord;

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "bessel:n=40,c=30,s=1")]
    pub target: Target,
    /// Total degrees of freedom shared by every two-layer split.
    #[arg(long, default_value_t = 28)]
    pub dof: usize,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub target: Target,
    pub total_dof: usize,
    pub quadrature: usize,
    pub optimizer: OptimizerConfig,
}

impl SweepArgs {
    pub fn config(&self, threads: Option<usize>) -> SweepConfig {
        SweepConfig {
            target: self.target.clone(),
            total_dof: self.dof,
            quadrature: self.quad.quad,
            optimizer: self.opt.config(threads),
        }
    }
}

pub fn run(cfg: &SweepConfig) -> CliResult<Outcome> {
    let table: SweepTable = parameter_sweep(cfg.total_dof, &cfg.target, &rule(cfg.quadrature)?, &cfg.optimizer)?;
    if table.rows.iter().skip(1).all(|r| !r.error.is_finite()) {
        return Err(CliError::Numerical("every sweep cell diverged".into()));
    }
    let mut csv = Table::new("sweep", &["deg_p", "deg_q", "error", "relative_error", "n_success", "n_runs"]);
    for r in &table.rows {
        csv.push(vec![
            r.deg_p.to_string(),
            r.deg_q.to_string(),
            num(r.error),
            num(r.relative_error),
            r.n_success.to_string(),
            r.n_runs.to_string(),
        ]);
    }
    Ok(Outcome { record: RunRecord::new("sweep", cfg, &table)?, tables: vec![csv] })
}
