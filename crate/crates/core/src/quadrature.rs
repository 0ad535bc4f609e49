//! Gauss–Legendre rules on `[-1, 1]` and the quadrature inner products used
//! for every loss and error in the crate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of nodes used for fitting unless a run overrides it.
pub const DEFAULT_ORDER: usize = 100;

const MAX_ORDER: usize = 1000;
const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i f(x_i)` without any finiteness check.
    pub fn sum<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }

    /// `Σ w_i v_i` for values already sampled on the nodes.
    pub fn dot(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.weights.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }
}

/// Legendre `P_m(x)` and `P'_m(x)` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=m {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let dp = m as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// The `m`-point Gauss–Legendre rule. Nodes are increasing and the rule is
/// symmetric by construction: only the non-negative half is computed.
pub fn gauss_legendre(m: usize) -> Result<QuadratureRule> {
    if m == 0 || m > MAX_ORDER {
        return Err(Error::InvalidOrder(m));
    }
    let half = m.div_ceil(2);
    let mut pos_nodes = Vec::with_capacity(half);
    let mut pos_weights = Vec::with_capacity(half);
    for i in 1..=half {
        let mut x = (PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        if m % 2 == 1 && i == half {
            x = 0.0;
        }
        let (_, dp) = legendre_with_derivative(m, x);
        pos_nodes.push(x);
        pos_weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }

    // pos_nodes is decreasing from near 1 down to the smallest non-negative root
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for (x, w) in pos_nodes.iter().zip(&pos_weights) {
        if *x != 0.0 {
            nodes.push(-x);
            weights.push(*w);
        }
    }
    for (x, w) in pos_nodes.iter().zip(&pos_weights).rev() {
        nodes.push(*x);
        weights.push(*w);
    }
    Ok(QuadratureRule { nodes, weights })
}

/// `Σ w_i f(x_i)`, rejecting non-finite samples.
pub fn integrate<F: Fn(f64) -> f64>(f: F, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (node, (&x, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteIntegrand { node, x });
        }
        acc += w * v;
    }
    Ok(acc)
}

/// Quadrature L2 norm of `f - g`, i.e. `sqrt(2F)` for the least-squares loss F.
pub fn l2_error<F, G>(f: F, g: G, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    integrate(|x| (f(x) - g(x)).powi(2), rule).map(f64::sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);

        let r = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[0] + s).abs() < 1e-15 && (r.nodes()[1] - s).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15 && (r.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_orders() {
        assert_eq!(gauss_legendre(0), Err(Error::InvalidOrder(0)));
        assert_eq!(gauss_legendre(1001), Err(Error::InvalidOrder(1001)));
        assert!(gauss_legendre(1000).is_ok());
    }

    #[test]
    fn weights_sum_and_symmetry() {
        for m in [1, 2, 3, 7, 10, 33, 100, 101, 257] {
            let r = gauss_legendre(m).unwrap();
            let total: f64 = r.weights().iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "m={m}: {total}");
            for i in 0..m {
                assert_eq!(r.nodes()[i], -r.nodes()[m - 1 - i]);
                assert_eq!(r.weights()[i], r.weights()[m - 1 - i]);
                assert!(r.weights()[i] > 0.0);
            }
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn high_monomial_on_default_rule() {
        let r = gauss_legendre(DEFAULT_ORDER).unwrap();
        let v = integrate(|x| x.powi(40), &r).unwrap();
        assert!((v - 2.0 / 41.0).abs() < 1e-12);
    }

    #[test]
    fn simple_integrals() {
        let r = gauss_legendre(DEFAULT_ORDER).unwrap();
        assert!((integrate(|_| 1.0, &r).unwrap() - 2.0).abs() < 1e-13);
        assert!((integrate(|x| x * x, &r).unwrap() - 2.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn runge_matches_composite_simpson() {
        let f = |x: f64| 1.0 / (1.0 + 25.0 * x * x);
        let panels = 1_000_000usize;
        let h = 2.0 / panels as f64;
        let mut simpson = f(-1.0) + f(1.0);
        for k in 1..panels {
            let x = -1.0 + k as f64 * h;
            simpson += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
        }
        simpson *= h / 3.0;
        let r = gauss_legendre(DEFAULT_ORDER).unwrap();
        assert!((integrate(f, &r).unwrap() - simpson).abs() < 1e-10);
    }

    #[test]
    fn l2_error_cases() {
        let r = gauss_legendre(DEFAULT_ORDER).unwrap();
        assert_eq!(l2_error(|x| x.sin(), |x| x.sin(), &r).unwrap(), 0.0);
        let e = l2_error(|x| x, |_| 0.0, &r).unwrap();
        assert!((e - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = gauss_legendre(3).unwrap();
        let err = integrate(|x| if x == 0.0 { f64::NAN } else { x }, &r).unwrap_err();
        assert_eq!(err, Error::NonFiniteIntegrand { node: 1, x: 0.0 });
    }
}
