use clap::Args;
use deeppoly::optimizer::FitResult;
use deeppoly::{fit_deep, fit_linear_ls, DeepPolynomial, FitProblem, OptimizerConfig, Polynomial, Signature, Target};
use serde::{Deserialize, Serialize};

use super::common::{check_not_diverged, rule, trials_table, OptimizerArgs, QuadArgs};
use crate::error::CliResult;
use crate::output::{curve_table, Outcome};
use crate::record::RunRecord;

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long, default_value = "runge:a=25")]
    pub target: Target,
    /// Coefficients per layer, outermost first.
    #[arg(long, default_value = "5,5")]
    pub sig: Signature,
    /// Also fit the linear least-squares polynomial with the same degrees of
    /// freedom.
    #[arg(long)]
    pub baseline: bool,
    #[command(flatten)]
    pub opt: OptimizerArgs,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub target: Target,
    pub signature: Signature,
    pub quadrature: usize,
    pub baseline: bool,
    pub optimizer: OptimizerConfig,
}

impl FitArgs {
    pub fn config(&self, threads: Option<usize>) -> FitConfig {
        FitConfig {
            target: self.target.clone(),
            signature: self.sig.clone(),
            quadrature: self.quad.quad,
            baseline: self.baseline,
            optimizer: self.opt.config(threads),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub degree: usize,
    pub l2_error: f64,
    pub coeffs: Polynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutput {
    pub fit: FitResult,
    /// The best parameters as normalized layers.
    pub best_layers: DeepPolynomial,
    pub baseline: Option<Baseline>,
}

pub fn run(cfg: &FitConfig) -> CliResult<Outcome> {
    let rule = rule(cfg.quadrature)?;
    let prob = FitProblem::new(cfg.target.clone(), cfg.signature.clone(), rule.clone())?;
    let fit = fit_deep(&prob, &cfg.optimizer)?;
    check_not_diverged(&fit)?;
    let best_layers = fit.best_composite()?;
    let baseline = if cfg.baseline {
        let degree = cfg.signature.dof() - 1;
        let (coeffs, l2_error) = fit_linear_ls(degree, &cfg.target, &rule)?;
        Some(Baseline { degree, l2_error, coeffs })
    } else {
        None
    };

    let mut tables = vec![curve_table("curve", &cfg.target, |x| best_layers.eval(x)), trials_table(&fit)];
    if let Some(b) = &baseline {
        tables.push(curve_table("baseline_curve", &cfg.target, |x| b.coeffs.eval(x)));
    }
    let out = FitOutput { fit, best_layers, baseline };
    Ok(Outcome { record: RunRecord::new("fit", cfg, &out)?, tables })
}
