//! Local optimization (BFGS then Newton refinement), random-restart
//! ensembles, the linear least-squares baseline and parameter sweeps.

mod bfgs;
mod ensemble;
mod linear;
mod newton;
mod sweep;

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bfgs::{bfgs_minimize, BfgsOutcome, WOLFE_C1, WOLFE_C2};
pub use ensemble::{cluster_points, ensemble_stats, error_levels, EnsembleOptions, EnsembleSummary, Histogram};
pub use linear::fit_linear_ls;
pub use newton::{fd_hessian, fd_jacobian, newton_refine, solve_or_pseudo, NewtonOutcome};
pub use sweep::{linear_to_left_endpoint, linear_to_right_endpoint, parameter_sweep, SweepRow, SweepTable};

use crate::error::{Error, Result};
use crate::objective::{FitProblem, Objective, ParameterVector, ProblemSpec};
use crate::polynomial::DeepPolynomial;
use crate::serde_util::inf_as_null;

/// Soft, non-fatal conditions recorded per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    LineSearchFailure,
    MaxIterations,
    SingularHessian,
    NoDescent,
    Diverged,
    /// Deflated Newton solved a singular Jacobian by least squares.
    SingularJacobian,
    /// A deflation round converged back onto a known minimizer.
    Duplicate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// BFGS stops once `‖∇F‖∞ ≤ gtol`.
    pub gtol: f64,
    /// Newton stops once `|vᵀHv|` falls below this.
    pub newton_stop: f64,
    /// Relative finite-difference step for Hessians and Jacobians.
    pub fd_step: f64,
    pub max_bfgs_iters: usize,
    pub max_newton_iters: usize,
    pub max_halvings: usize,
    /// Skip the Newton phase when false.
    pub newton_refine: bool,
    pub n_trials: usize,
    pub seed: u64,
    /// Worker threads for trials; `None` uses the global rayon pool.
    pub threads: Option<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            gtol: 1e-12,
            newton_stop: 1e-14,
            fd_step: 1e-5,
            max_bfgs_iters: 2000,
            max_newton_iters: 50,
            max_halvings: 10,
            newton_refine: true,
            n_trials: 10,
            seed: 0,
            threads: None,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("gtol", self.gtol), ("newton_stop", self.newton_stop), ("fd_step", self.fd_step)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Runs `op` on a pool sized by `threads`, or on the global pool.
    pub fn install<R: Send>(&self, op: impl FnOnce() -> R + Send) -> Result<R> {
        match self.threads {
            None => Ok(op()),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map(|pool| pool.install(op))
                .map_err(|e| Error::InvalidConfig(e.to_string())),
        }
    }
}

/// Result of BFGS followed by (optional) Newton refinement.
#[derive(Debug, Clone)]
pub struct LocalOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub bfgs_iters: usize,
    pub newton_iters: usize,
    pub flags: Vec<Flag>,
}

/// BFGS from `x0`, then Newton refinement from the BFGS output.
pub fn local_minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimizerConfig) -> LocalOutcome {
    let bfgs = bfgs_minimize(obj, x0, cfg);
    let mut flags: Vec<Flag> = bfgs.flag.into_iter().collect();
    if !bfgs.value.is_finite() {
        return LocalOutcome { x: bfgs.x, value: f64::INFINITY, bfgs_iters: bfgs.iterations, newton_iters: 0, flags };
    }
    if !cfg.newton_refine {
        return LocalOutcome { x: bfgs.x, value: bfgs.value, bfgs_iters: bfgs.iterations, newton_iters: 0, flags };
    }
    let newton = newton_refine(obj, &bfgs.x, cfg);
    for f in newton.flags {
        if !flags.contains(&f) {
            flags.push(f);
        }
    }
    LocalOutcome {
        x: newton.x,
        value: newton.value,
        bfgs_iters: bfgs.iterations,
        newton_iters: newton.iterations,
        flags,
    }
}

/// Standard-normal starting point for `trial`, drawn from the ChaCha stream
/// `(seed, trial)` so trials do not depend on execution order.
pub fn trial_init(seed: u64, trial: u64, dim: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// L2 error `sqrt(2F)`; `+inf` (JSON `null`) for a diverged trial.
    #[serde(with = "inf_as_null")]
    pub error: f64,
    pub bfgs_iters: usize,
    pub newton_iters: usize,
    pub flags: Vec<Flag>,
    pub params: ParameterVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub problem: ProblemSpec,
    pub seed: u64,
    pub best: ParameterVector,
    #[serde(with = "inf_as_null")]
    pub l2_error: f64,
    pub best_trial: usize,
    pub trials: Vec<TrialRecord>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl FitResult {
    pub fn errors(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.error).collect()
    }

    /// Normalized layers of the best trial.
    pub fn best_composite(&self) -> Result<DeepPolynomial> {
        self.problem.signature.unpack(&self.best)
    }

    pub fn all_diverged(&self) -> bool {
        self.trials.iter().all(|t| !t.error.is_finite())
    }
}

fn error_of(value: f64) -> f64 {
    if value.is_finite() {
        (2.0 * value).sqrt()
    } else {
        f64::INFINITY
    }
}

fn run_trial(prob: &FitProblem, trial: u64, x0: &[f64], cfg: &OptimizerConfig) -> TrialRecord {
    let out = local_minimize(prob, x0, cfg);
    let error = error_of(out.value);
    let mut flags = out.flags;
    if !error.is_finite() && !flags.contains(&Flag::Diverged) {
        flags.push(Flag::Diverged);
    }
    TrialRecord {
        trial,
        error,
        bfgs_iters: out.bfgs_iters,
        newton_iters: out.newton_iters,
        flags,
        params: ParameterVector(out.x),
    }
}

/// First index with the smallest error (infinite errors only win if all are).
fn argmin(trials: &[TrialRecord]) -> usize {
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.error < trials[best].error {
            best = i;
        }
    }
    best
}

fn assemble(prob: &FitProblem, seed: u64, trials: Vec<TrialRecord>, started: Instant) -> FitResult {
    let best_trial = argmin(&trials);
    FitResult {
        problem: prob.spec(),
        seed,
        best: trials[best_trial].params.clone(),
        l2_error: trials[best_trial].error,
        best_trial,
        trials,
        wall_time: started.elapsed(),
    }
}

/// Random-restart fit: `n_trials` standard-normal starts, each minimized by
/// BFGS then Newton; the trial with the least L2 error wins.
pub fn fit_deep(prob: &FitProblem, cfg: &OptimizerConfig) -> Result<FitResult> {
    cfg.validate()?;
    if cfg.n_trials == 0 {
        return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
    }
    let started = Instant::now();
    let dim = prob.signature().dof();
    let trials = cfg.install(|| {
        (0..cfg.n_trials as u64)
            .into_par_iter()
            .map(|t| run_trial(prob, t, &trial_init(cfg.seed, t, dim), cfg))
            .collect::<Vec<_>>()
    })?;
    Ok(assemble(prob, cfg.seed, trials, started))
}

/// Like [`fit_deep`] but from caller-supplied starting points.
pub fn fit_from_inits(prob: &FitProblem, inits: &[Vec<f64>], cfg: &OptimizerConfig) -> Result<FitResult> {
    cfg.validate()?;
    if inits.is_empty() {
        return Err(Error::InvalidConfig("at least one initial point is required".into()));
    }
    let dim = prob.signature().dof();
    if let Some(bad) = inits.iter().find(|x| x.len() != dim) {
        return Err(Error::LengthMismatch { expected: dim, got: bad.len() });
    }
    let started = Instant::now();
    let trials = cfg.install(|| {
        inits
            .par_iter()
            .enumerate()
            .map(|(t, x0)| run_trial(prob, t as u64, x0, cfg))
            .collect::<Vec<_>>()
    })?;
    Ok(assemble(prob, cfg.seed, trials, started))
}
