//! Two-layer degree splits at a fixed number of degrees of freedom, each
//! reported relative to linear least squares with the same freedom.

use serde::{Deserialize, Serialize};

use super::{fit_deep, fit_from_inits, FitResult, OptimizerConfig};
use crate::error::{Error, Result};
use crate::objective::{FitProblem, ParameterVector, Signature};
use crate::polynomial::Polynomial;
use crate::quadrature::QuadratureRule;
use crate::serde_util::inf_as_null;
use crate::targets::Target;

/// Runs whose error is within this factor of the cell's best count as hits.
pub const SUCCESS_FACTOR: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Inner degree; `0` marks the linear least-squares reference row.
    pub deg_p: usize,
    pub deg_q: usize,
    #[serde(with = "inf_as_null")]
    pub error: f64,
    #[serde(with = "inf_as_null")]
    pub relative_error: f64,
    pub n_success: usize,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub total_dof: usize,
    pub linear_error: f64,
    pub rows: Vec<SweepRow>,
}

/// Left endpoint `(q, p) = (c, x)`: the outer layer is the linear-LS
/// polynomial itself. Packs for signature `(T, 2)`.
pub fn linear_to_left_endpoint(lin: &Polynomial) -> ParameterVector {
    ParameterVector(lin.coeffs().to_vec())
}

/// Right endpoint: outer `b̃₀ + b̃₁ y`, inner monic with zero constant, so
/// `b̃₀ = c₀`, `b̃₁ = c_d`, `ã_i = c_i / c_d`. Packs for signature `(2, T)`.
pub fn linear_to_right_endpoint(lin: &Polynomial) -> Result<ParameterVector> {
    let c = lin.coeffs();
    if c.len() < 2 {
        return Err(Error::InvalidConfig("right endpoint needs degree >= 1".into()));
    }
    let lead = lin.leading();
    if lead == 0.0 || !lead.is_finite() {
        return Err(Error::SingularLeadingCoefficient { layer: 0 });
    }
    let mut v = vec![c[0], lead];
    v.extend(c[1..c.len() - 1].iter().map(|ci| ci / lead));
    Ok(ParameterVector(v))
}

fn count_success(errors: &[f64], best: f64) -> usize {
    errors.iter().filter(|&&e| e.is_finite() && e <= best * SUCCESS_FACTOR).count()
}

fn merge(random: FitResult, seeded: Option<FitResult>) -> (f64, Vec<f64>) {
    let mut errors = random.errors();
    let mut best = random.l2_error;
    if let Some(s) = seeded {
        errors.extend(s.errors());
        best = best.min(s.l2_error);
    }
    (best, errors)
}

/// For every split `deg q + deg p = total_dof` with both degrees ≥ 1, fits
/// signature `(deg q + 1, deg p + 1)` by random restarts; the two endpoints
/// get one extra run started from the mapped linear-LS solution. The first
/// row is the linear-LS reference at degree `total_dof - 1`.
pub fn parameter_sweep(
    total_dof: usize,
    target: &Target,
    rule: &QuadratureRule,
    cfg: &OptimizerConfig,
) -> Result<SweepTable> {
    if total_dof < 2 {
        return Err(Error::InvalidConfig("sweep needs at least two degrees of freedom".into()));
    }
    let (lin, linear_error) = super::fit_linear_ls(total_dof - 1, target, rule)?;
    let mut rows = vec![SweepRow {
        deg_p: 0,
        deg_q: total_dof - 1,
        error: linear_error,
        relative_error: 1.0,
        n_success: 1,
        n_runs: 1,
    }];
    for deg_p in 1..total_dof {
        let deg_q = total_dof - deg_p;
        let sig = Signature::new(vec![deg_q + 1, deg_p + 1])?;
        let prob = FitProblem::new(target.clone(), sig, rule.clone())?;
        let seed_point = if deg_p == 1 {
            Some(linear_to_left_endpoint(&lin).0)
        } else if deg_q == 1 {
            linear_to_right_endpoint(&lin).ok().map(|v| v.0)
        } else {
            None
        };
        let random = fit_deep(&prob, cfg)?;
        let seeded = match seed_point {
            Some(x0) => Some(fit_from_inits(&prob, &[x0], cfg)?),
            None => None,
        };
        let (error, errors) = merge(random, seeded);
        rows.push(SweepRow {
            deg_p,
            deg_q,
            error,
            relative_error: error / linear_error,
            n_success: count_success(&errors, error),
            n_runs: errors.len(),
        });
    }
    Ok(SweepTable { total_dof, linear_error, rows })
}
