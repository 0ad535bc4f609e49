use clap::{Args, ValueEnum};
use deeppoly::deflation::{defmulti, DeflationRound, DeflationState, JacobianMode};
use deeppoly::optimizer::trial_init;
use deeppoly::{FitProblem, OptimizerConfig, Signature, Target};
use serde::{Deserialize, Serialize};

use super::common::{rule, QuadArgs};
use crate::error::{CliError, CliResult};
use crate::output::{curve_table, num, Outcome, Table};
use crate::record::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Jacobian {
    Fd,
    Assembled,
}

/// Layout of `--init`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitOrder {
    /// The packed parameter vector: outermost layer first.
    OuterFirst,
    /// Layer blocks listed innermost first.
    InnerFirst,
}

#[derive(Debug, Clone, Args)]
pub struct DeflateArgs {
    #[arg(long, default_value = "bessel:n=0,c=10")]
    pub target: Target,
    #[arg(long, default_value = "3,7")]
    pub sig: Signature,
    /// Starting parameters, comma separated; drawn from `--seed` when absent.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub init: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = InitOrder::OuterFirst)]
    pub init_order: InitOrder,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Deflation rounds after the first minimization.
    #[arg(long, default_value_t = 1)]
    pub rounds: usize,
    #[arg(long, default_value_t = DeflationState::default().alpha)]
    pub alpha: f64,
    #[arg(long, default_value_t = DeflationState::default().beta)]
    pub beta: f64,
    /// Offset added to every coordinate of the latest minimizer.
    #[arg(long, default_value_t = DeflationState::default().perturb)]
    pub perturb: f64,
    /// Newton step length.
    #[arg(long, default_value_t = DeflationState::default().step)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = Jacobian::Fd)]
    pub jacobian: Jacobian,
    /// Deflated and plain Newton iteration cap.
    #[arg(long, default_value_t = OptimizerConfig::default().max_newton_iters)]
    pub max_newton_iters: usize,
    #[arg(long, default_value_t = OptimizerConfig::default().max_bfgs_iters)]
    pub max_bfgs_iters: usize,
    #[command(flatten)]
    pub quad: QuadArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflateConfig {
    pub target: Target,
    pub signature: Signature,
    pub quadrature: usize,
    /// Packed starting vector actually used.
    pub init: Vec<f64>,
    /// Seed the start was drawn from, if it was not given.
    pub init_seed: Option<u64>,
    pub rounds: usize,
    pub deflation: DeflationState,
    pub optimizer: OptimizerConfig,
}

/// Reorders layer blocks listed innermost first into packed order.
fn pack_inner_first(sig: &Signature, v: &[f64]) -> Vec<f64> {
    let sizes: Vec<usize> = sig.counts().iter().enumerate().map(|(i, &m)| if i == 0 { m } else { m - 2 }).collect();
    let mut blocks = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes.iter().rev() {
        blocks.push(&v[at..at + s]);
        at += s;
    }
    blocks.iter().rev().flat_map(|b| b.iter().copied()).collect()
}

impl DeflateArgs {
    pub fn config(&self, threads: Option<usize>) -> CliResult<DeflateConfig> {
        let dim = self.sig.dof();
        let (init, init_seed) = match &self.init {
            Some(v) if v.len() != dim => {
                return Err(CliError::Config(format!("--init has {} values, signature {} needs {dim}", v.len(), self.sig)));
            }
            Some(v) => match self.init_order {
                InitOrder::OuterFirst => (v.clone(), None),
                InitOrder::InnerFirst => (pack_inner_first(&self.sig, v), None),
            },
            None => (trial_init(self.seed, 0, dim), Some(self.seed)),
        };
        let jacobian = match self.jacobian {
            Jacobian::Fd => JacobianMode::FiniteDifference,
            Jacobian::Assembled => JacobianMode::Assembled,
        };
        Ok(DeflateConfig {
            target: self.target.clone(),
            signature: self.sig.clone(),
            quadrature: self.quad.quad,
            init,
            init_seed,
            rounds: self.rounds,
            deflation: DeflationState {
                roots: Vec::new(),
                alpha: self.alpha,
                beta: self.beta,
                perturb: self.perturb,
                step: self.step,
                jacobian,
            },
            optimizer: OptimizerConfig {
                max_newton_iters: self.max_newton_iters,
                max_bfgs_iters: self.max_bfgs_iters,
                n_trials: 1,
                threads,
                ..OptimizerConfig::default()
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflateOutput {
    pub rounds: Vec<DeflationRound>,
}

pub fn run(cfg: &DeflateConfig) -> CliResult<Outcome> {
    let prob = FitProblem::new(cfg.target.clone(), cfg.signature.clone(), rule(cfg.quadrature)?)?;
    let rounds = defmulti(&prob, &cfg.init, cfg.rounds, &cfg.deflation, &cfg.optimizer)?;
    if rounds.iter().all(|r| !r.error.is_finite()) {
        return Err(CliError::Numerical("every deflation round diverged".into()));
    }

    let mut summary = Table::new("rounds", &["round", "error", "duplicate", "inner_iters", "distance_to_previous"]);
    let mut tables = Vec::new();
    for (i, r) in rounds.iter().enumerate() {
        let dist = if i == 0 {
            f64::NAN
        } else {
            rounds[i - 1].root.iter().zip(&r.root).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        };
        summary.push(vec![r.round.to_string(), num(r.error), r.duplicate.to_string(), r.inner_iters.to_string(), num(dist)]);
        if r.error.is_finite() {
            let g = cfg.signature.unpack(&r.root)?;
            tables.push(curve_table(&format!("curve_round{}", r.round), &cfg.target, |x| g.eval(x)));
        }
    }
    tables.insert(0, summary);
    Ok(Outcome { record: RunRecord::new("deflate", cfg, &DeflateOutput { rounds })?, tables })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inner_first_blocks_are_reversed() {
        let sig: Signature = "3,7".parse().unwrap();
        let listed: Vec<f64> = (0..8).map(f64::from).collect();
        assert_eq!(pack_inner_first(&sig, &listed), vec![5.0, 6.0, 7.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
        let sig: Signature = "2,3,4".parse().unwrap();
        let listed: Vec<f64> = (0..5).map(f64::from).collect();
        assert_eq!(pack_inner_first(&sig, &listed), vec![3.0, 4.0, 2.0, 0.0, 1.0]);
    }
}
