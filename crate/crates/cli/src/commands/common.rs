use clap::Args;
use deeppoly::optimizer::FitResult;
use deeppoly::quadrature::DEFAULT_ORDER;
use deeppoly::{gauss_legendre, OptimizerConfig, QuadratureRule};

use crate::error::{CliError, CliResult};
use crate::output::{num, Table};

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Random restarts.
    #[arg(long, default_value_t = OptimizerConfig::default().n_trials)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// BFGS gradient tolerance (infinity norm).
    #[arg(long, default_value_t = OptimizerConfig::default().gtol)]
    pub gtol: f64,
    /// Newton stops once |vᵀHv| is below this.
    #[arg(long, default_value_t = OptimizerConfig::default().newton_stop)]
    pub newton_stop: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().fd_step)]
    pub fd_step: f64,
    #[arg(long, default_value_t = OptimizerConfig::default().max_bfgs_iters)]
    pub max_bfgs_iters: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().max_newton_iters)]
    pub max_newton_iters: usize,
    /// Stop after BFGS.
    #[arg(long)]
    pub no_newton: bool,
}

impl OptimizerArgs {
    pub fn config(&self, threads: Option<usize>) -> OptimizerConfig {
        OptimizerConfig {
            gtol: self.gtol,
            newton_stop: self.newton_stop,
            fd_step: self.fd_step,
            max_bfgs_iters: self.max_bfgs_iters,
            max_newton_iters: self.max_newton_iters,
            newton_refine: !self.no_newton,
            n_trials: self.trials,
            seed: self.seed,
            threads,
            ..OptimizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct QuadArgs {
    /// Gauss–Legendre points.
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    pub quad: usize,
}

pub fn rule(order: usize) -> CliResult<QuadratureRule> {
    Ok(gauss_legendre(order)?)
}

pub fn check_not_diverged(res: &FitResult) -> CliResult<()> {
    if res.all_diverged() {
        return Err(CliError::Numerical(format!("all {} trials diverged", res.trials.len())));
    }
    Ok(())
}

/// One row per trial.
pub fn trials_table(res: &FitResult) -> Table {
    let mut t = Table::new("trials", &["trial", "error", "bfgs_iters", "newton_iters", "flags"]);
    for tr in &res.trials {
        let flags: Vec<String> = tr
            .flags
            .iter()
            .map(|f| serde_json::to_value(f).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default())
            .collect();
        t.push(vec![
            tr.trial.to_string(),
            num(tr.error),
            tr.bfgs_iters.to_string(),
            tr.newton_iters.to_string(),
            flags.join(";"),
        ]);
    }
    t
}
