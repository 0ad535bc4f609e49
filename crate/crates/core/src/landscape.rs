//! Two-parameter model of the coupled right-endpoint loss:
//! `g(x) = b₁ x² + b₁ a₁ x`, i.e. outer `b₁ y` after inner `x² + a₁ x`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::targets::Target;

/// Target sampled on a rule, with `F(a₁, b₁) = ½ Σ w (g - f)²`.
#[derive(Debug, Clone)]
pub struct CoupledModel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    samples: Vec<f64>,
}

impl CoupledModel {
    pub fn new(target: &Target, rule: &QuadratureRule) -> Result<Self> {
        target.validate()?;
        Ok(Self {
            nodes: rule.nodes().to_vec(),
            weights: rule.weights().to_vec(),
            samples: rule.nodes().iter().map(|&x| target.eval(x)).collect(),
        })
    }

    pub fn loss(&self, a1: f64, b1: f64) -> f64 {
        let mut acc = 0.0;
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(&self.samples) {
            let r = b1 * (x * x + a1 * x) - f;
            acc += w * r * r;
        }
        0.5 * acc
    }

    /// `(∂F/∂a₁, ∂F/∂b₁)`.
    pub fn gradient(&self, a1: f64, b1: f64) -> (f64, f64) {
        let (mut ga, mut gb) = (0.0, 0.0);
        for ((&x, &w), &f) in self.nodes.iter().zip(&self.weights).zip(&self.samples) {
            let inner = x * x + a1 * x;
            let r = b1 * inner - f;
            ga += w * r * b1 * x;
            gb += w * r * inner;
        }
        (ga, gb)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossGrid {
    pub a1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Row-major: `values[i][j] = F(a1[j], b1[i])`.
    pub values: Vec<Vec<f64>>,
}

impl LossGrid {
    /// `(a₁, b₁, F)` at the smallest grid value.
    pub fn argmin(&self) -> (f64, f64, f64) {
        let mut best = (self.a1[0], self.b1[0], f64::INFINITY);
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v < best.2 {
                    best = (self.a1[j], self.b1[i], v);
                }
            }
        }
        best
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluates the model on a uniform `n_a × n_b` grid over the given ranges.
pub fn loss_surface(
    model: &CoupledModel,
    a_range: (f64, f64),
    b_range: (f64, f64),
    n_a: usize,
    n_b: usize,
) -> Result<LossGrid> {
    let ok = |r: (f64, f64)| r.0.is_finite() && r.1.is_finite() && r.0 < r.1;
    if !ok(a_range) || !ok(b_range) {
        return Err(Error::InvalidConfig("grid ranges must be finite with lo < hi".into()));
    }
    if n_a < 2 || n_b < 2 {
        return Err(Error::InvalidConfig("grid resolution must be at least 2".into()));
    }
    let a1 = linspace(a_range.0, a_range.1, n_a);
    let b1 = linspace(b_range.0, b_range.1, n_b);
    let values = b1.iter().map(|&b| a1.iter().map(|&a| model.loss(a, b)).collect()).collect();
    Ok(LossGrid { a1, b1, values })
}
