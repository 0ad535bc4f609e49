use clap::Args;
use deeppoly::optimizer::{ensemble_stats, EnsembleOptions, EnsembleSummary};
use deeppoly::{fit_deep, FitProblem, OptimizerConfig, ParameterVector, Signature, Target};
use serde::{Deserialize, Serialize};

use super::common::{check_not_diverged, rule, trials_table, OptimizerArgs, QuadArgs};
use crate::error::CliResult;
use crate::output::{num, Outcome, Table};
use crate::record::RunRecord;

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    #[arg(long, default_value = "bessel:n=40,c=30,s=1")]
    pub target: Target,
    #[arg(long, default_value = "15,15")]
    pub sig: Signature,
    /// Log-spaced histogram bins.
    #[arg(long, default_value_t = EnsembleOptions::default().bins)]
    pub bins: usize,
    /// Best trials reported with their coefficients.
    #[arg(long, default_value_t = EnsembleOptions::default().n_top)]
    pub top: usize,
    /// Relative parameter distance joining two minima into one cluster.
    #[arg(long, default_value_t = EnsembleOptions::default().cluster_threshold)]
    pub cluster_threshold: f64,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub target: Target,
    pub signature: Signature,
    pub quadrature: usize,
    pub optimizer: OptimizerConfig,
    pub stats: EnsembleOptions,
}

impl EnsembleArgs {
    pub fn config(&self, threads: Option<usize>) -> EnsembleConfig {
        EnsembleConfig {
            target: self.target.clone(),
            signature: self.sig.clone(),
            quadrature: self.quad.quad,
            optimizer: self.opt.config(threads),
            stats: EnsembleOptions {
                n_top: self.top,
                bins: self.bins,
                cluster_threshold: self.cluster_threshold,
                ..EnsembleOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleOutput {
    pub l2_error: f64,
    pub best_trial: usize,
    pub best: ParameterVector,
    pub summary: EnsembleSummary,
}

pub fn run(cfg: &EnsembleConfig) -> CliResult<Outcome> {
    let prob = FitProblem::new(cfg.target.clone(), cfg.signature.clone(), rule(cfg.quadrature)?)?;
    let fit = fit_deep(&prob, &cfg.optimizer)?;
    check_not_diverged(&fit)?;
    let summary = ensemble_stats(&fit, &cfg.stats);

    let mut hist = Table::new("histogram", &["bin", "lo", "hi", "count", "mode"]);
    let h = &summary.histogram;
    for (i, &c) in h.counts.iter().enumerate() {
        let mode = summary.modes.contains(&i);
        hist.push(vec![i.to_string(), num(h.edges[i]), num(h.edges[i + 1]), c.to_string(), mode.to_string()]);
    }

    let mut header = vec!["rank".to_string(), "trial".into(), "error".into(), "cluster".into()];
    header.extend((0..prob.signature().dof()).map(|i| format!("v{i}")));
    let mut top = Table::with_header("top", header);
    for (rank, t) in summary.top.iter().enumerate() {
        let mut row = vec![(rank + 1).to_string(), t.trial.to_string(), num(t.error), t.cluster.to_string()];
        row.extend(t.params.iter().map(|v| num(*v)));
        top.push(row);
    }

    let tables = vec![hist, top, trials_table(&fit)];
    let out = EnsembleOutput { l2_error: fit.l2_error, best_trial: fit.best_trial, best: fit.best, summary };
    Ok(Outcome { record: RunRecord::new("ensemble", cfg, &out)?, tables })
}
