//! Composite approximants from the Newton iteration for the inverse p-th
//! root, `f_{k+1} = f_k ((p+1) - f_k^p x) / p`, `f_0 = 1`.
//!
//! Driven by `x²` with `p = 2`, `x² f_k` approximates `|x|`; each step
//! composes with a cubic, so `deg f_k = 3^k - 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{Polynomial, DEFAULT_DEGREE_CAP};

/// Errors below this are at the resolution of double precision and are not
/// used for ratios or fits.
pub const ERROR_FLOOR: f64 = 1e-12;

/// `f_k(x)` for the inverse p-th root iteration, `x ∈ (0, 1]`.
pub fn inv_pth_root_iterate(p: u32, k: usize, x: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::DomainError(format!("root order {p} is below 2")));
    }
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::DomainError(format!("x = {x} is outside (0, 1]")));
    }
    let pf = f64::from(p);
    let mut f: f64 = 1.0;
    for _ in 0..k {
        f = f * ((pf + 1.0) - f.powi(p as i32) * x) / pf;
    }
    Ok(f)
}

/// `f_k` of the `p = 2` iteration driven by `y = x²`.
fn abs_iterate(k: usize, y: f64) -> f64 {
    let mut f = 1.0;
    for _ in 0..k {
        f = 0.5 * f * (3.0 - y * f * f);
    }
    f
}

/// `x² f_k(x)`, approximating `|x|`; exactly 0 at `x = 0`.
pub fn abs_approx(k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let y = x * x;
    y * abs_iterate(k, y)
}

/// Expanded `f_k` of the `|x|` iteration.
pub fn abs_iterate_expanded(k: usize, cap: usize) -> Result<Polynomial> {
    let degree = 3usize.checked_pow(k as u32).map(|d| d - 1).unwrap_or(usize::MAX);
    if degree > cap {
        return Err(Error::DegreeCapExceeded { degree, cap });
    }
    let y = Polynomial::monomial(2);
    let mut f = Polynomial::constant(1.0);
    for _ in 0..k {
        let cubic = Polynomial::constant(3.0).add(&y.mul(&f).mul(&f).scale(-1.0));
        f = f.mul(&cubic).scale(0.5);
    }
    Ok(f)
}

/// Expanded `x² f_k(x)` under the default degree cap.
pub fn abs_expanded(k: usize) -> Result<Polynomial> {
    abs_expanded_with_cap(k, DEFAULT_DEGREE_CAP)
}

pub fn abs_expanded_with_cap(k: usize, cap: usize) -> Result<Polynomial> {
    let degree = 3usize.checked_pow(k as u32).map(|d| d + 1).unwrap_or(usize::MAX);
    if degree > cap {
        return Err(Error::DegreeCapExceeded { degree, cap });
    }
    Ok(Polynomial::monomial(2).mul(&abs_iterate_expanded(k, cap)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub x: f64,
    /// `E_k = 1 - |x| f_k`.
    pub error: f64,
    /// `E_{k+1} / E_k`, absent once `E_k` is below [`ERROR_FLOOR`] or at `k_max`.
    pub ratio: Option<f64>,
    /// `r_k = |x| f_k`.
    pub r: f64,
}

/// Errors `E_k` for `k = 0..=k_max` at every nonzero `x`.
pub fn convergence_trace(k_max: usize, xs: &[f64]) -> Result<Vec<TraceRow>> {
    let mut rows = Vec::with_capacity((k_max + 1) * xs.len());
    for &x in xs {
        if x == 0.0 || !(x.abs() <= 1.0) {
            return Err(Error::DomainError(format!("trace point {x} must lie in [-1, 1] without 0")));
        }
        let ax = x.abs();
        let y = x * x;
        let mut f: f64 = 1.0;
        let mut errors = Vec::with_capacity(k_max + 2);
        let mut rs = Vec::with_capacity(k_max + 2);
        for _ in 0..=k_max + 1 {
            rs.push(ax * f);
            errors.push(1.0 - ax * f);
            f = 0.5 * f * (3.0 - y * f * f);
        }
        for k in 0..=k_max {
            let ratio = (k < k_max && errors[k] >= ERROR_FLOOR).then(|| errors[k + 1] / errors[k]);
            rows.push(TraceRow { k, x, error: errors[k], ratio, r: rs[k] });
        }
    }
    Ok(rows)
}

/// Least-squares line through `(k, ln E_k)` over the rows with
/// `E_k ≥ ERROR_FLOOR`. Returns `(slope, r²)`, or `None` with fewer than
/// two usable points.
pub fn log_linear_fit(rows: &[TraceRow]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error >= ERROR_FLOOR)
        .map(|r| (r.k as f64, r.error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}
