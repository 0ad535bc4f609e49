//! Least-squares loss over normalized composites and its analytic gradient.
//!
//! Parameters are packed outermost layer first: all `μ_1` coefficients
//! `b_0, …, b_d` of the outer layer, then for each inner layer its free
//! coefficients `a_1, …, a_{e-1}` (the leading 1 and constant 0 are implicit).

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polynomial::{degrees_of_freedom, DeepPolynomial, Polynomial};
use crate::quadrature::{gauss_legendre, QuadratureRule};
use crate::targets::Target;

/// A differentiable scalar objective on `R^n`.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.value_and_gradient(x).1
    }
}

/// Per-layer coefficient counts `(μ_1, …, μ_L)`, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Signature(Vec<usize>);

impl TryFrom<Vec<usize>> for Signature {
    type Error = Error;

    fn try_from(counts: Vec<usize>) -> Result<Self> {
        Signature::new(counts)
    }
}

impl From<Signature> for Vec<usize> {
    fn from(s: Signature) -> Self {
        s.0
    }
}

impl Signature {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        match counts.split_first() {
            None => Err(Error::InvalidSignature("empty signature".into())),
            Some((&0, _)) => Err(Error::InvalidSignature("outer layer needs at least one coefficient".into())),
            Some((_, inner)) if inner.iter().any(|&m| m < 2) => Err(Error::InvalidSignature(
                "inner layers need at least two coefficients (degree >= 1)".into(),
            )),
            _ => Ok(Signature(counts)),
        }
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn layers(&self) -> usize {
        self.0.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.0.iter().map(|m| m - 1).collect()
    }

    pub fn dof(&self) -> usize {
        degrees_of_freedom(&self.0)
    }

    /// Normalized composite described by a packed parameter vector.
    pub fn unpack(&self, v: &[f64]) -> Result<DeepPolynomial> {
        self.check_len(v)?;
        let layers = self.layer_coeffs(v).into_iter().map(Polynomial::new).collect();
        DeepPolynomial::new(layers)
    }

    /// Packs a normalized composite whose layer sizes match the signature.
    pub fn pack(&self, g: &DeepPolynomial) -> Result<ParameterVector> {
        let sizes: Vec<usize> = g.layers().iter().map(|p| p.coeffs().len()).collect();
        if sizes != self.0 {
            return Err(Error::InvalidSignature(format!("layer sizes {sizes:?} do not match {:?}", self.0)));
        }
        if !g.is_normalized() {
            return Err(Error::InvalidConfig("composite must be normalized before packing".into()));
        }
        let mut v = g.layers()[0].coeffs().to_vec();
        for layer in &g.layers()[1..] {
            let c = layer.coeffs();
            v.extend_from_slice(&c[1..c.len() - 1]);
        }
        Ok(ParameterVector(v))
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dof() {
            return Err(Error::LengthMismatch { expected: self.dof(), got: v.len() });
        }
        Ok(())
    }

    /// Full ascending coefficient vectors per layer.
    fn layer_coeffs(&self, v: &[f64]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.0.len());
        out.push(v[..self.0[0]].to_vec());
        let mut at = self.0[0];
        for &m in &self.0[1..] {
            let mut c = Vec::with_capacity(m);
            c.push(0.0);
            c.extend_from_slice(&v[at..at + m - 2]);
            c.push(1.0);
            at += m - 2;
            out.push(c);
        }
        out
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl std::str::FromStr for Signature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .trim_matches(|c| c == '(' || c == ')')
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| Error::InvalidSignature(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Signature::new(counts)
    }
}

/// Flat packed coefficients of a normalized composite.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(pub Vec<f64>);

impl Deref for ParameterVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(v: Vec<f64>) -> Self {
        ParameterVector(v)
    }
}

impl ParameterVector {
    pub fn distance(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

/// Serializable description of a fit problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub target: Target,
    pub signature: Signature,
    pub quadrature_order: usize,
}

/// Target, layer signature and quadrature rule, with the target sampled on
/// the rule's nodes once.
#[derive(Debug, Clone)]
pub struct FitProblem {
    target: Target,
    signature: Signature,
    rule: QuadratureRule,
    samples: Vec<f64>,
}

impl FitProblem {
    pub fn new(target: Target, signature: Signature, rule: QuadratureRule) -> Result<Self> {
        target.validate()?;
        let samples: Vec<f64> = rule.nodes().iter().map(|&x| target.eval(x)).collect();
        if let Some(node) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteIntegrand { node, x: rule.nodes()[node] });
        }
        Ok(Self { target, signature, rule, samples })
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        Self::new(spec.target.clone(), spec.signature.clone(), gauss_legendre(spec.quadrature_order)?)
    }

    pub fn spec(&self) -> ProblemSpec {
        ProblemSpec {
            target: self.target.clone(),
            signature: self.signature.clone(),
            quadrature_order: self.rule.order(),
        }
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Target values on the quadrature nodes.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `F = ½ Σ w_i (f(x_i) - g(x_i))²`.
    pub fn loss(&self, v: &[f64]) -> Result<f64> {
        self.signature.check_len(v)?;
        Ok(self.loss_unchecked(v))
    }

    pub fn gradient(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.signature.check_len(v)?;
        Ok(self.loss_and_gradient_unchecked(v).1)
    }

    /// `sqrt(2F)`.
    pub fn l2_error(&self, v: &[f64]) -> Result<f64> {
        self.loss(v).map(|f| (2.0 * f).sqrt())
    }

    /// Loss of an arbitrary (possibly unnormalized) composite.
    pub fn loss_of(&self, g: &DeepPolynomial) -> f64 {
        let r: Vec<f64> = self
            .rule
            .nodes()
            .iter()
            .zip(&self.samples)
            .map(|(&x, &f)| (f - g.eval(x)).powi(2))
            .collect();
        0.5 * self.rule.dot(&r)
    }

    fn loss_unchecked(&self, v: &[f64]) -> f64 {
        let layers = self.signature.layer_coeffs(v);
        let mut acc = 0.0;
        for ((&x, &w), &f) in self.rule.nodes().iter().zip(self.rule.weights()).zip(&self.samples) {
            let g = layers.iter().rev().fold(x, |y, c| horner(c, y));
            let r = f - g;
            acc += w * r * r;
        }
        0.5 * acc
    }

    /// Loss and gradient in one pass over the nodes.
    ///
    /// With `t_L = x`, `t_i = p_i(t_{i+1})` and `D_i = Π_{j<i} p_j'(t_{j+1})`,
    /// the derivative of `g` with respect to coefficient `k` of layer `i` is
    /// `D_i · t_{i+1}^k`.
    fn loss_and_gradient_unchecked(&self, v: &[f64]) -> (f64, Vec<f64>) {
        let layers = self.signature.layer_coeffs(v);
        let depth = layers.len();
        let counts = self.signature.counts();
        let mut grad = vec![0.0; v.len()];
        let mut t = vec![0.0; depth + 1];
        let mut slope = vec![0.0; depth];
        let mut loss = 0.0;

        for ((&x, &w), &f) in self.rule.nodes().iter().zip(self.rule.weights()).zip(&self.samples) {
            t[depth] = x;
            for i in (0..depth).rev() {
                let (val, der) = horner_with_derivative(&layers[i], t[i + 1]);
                t[i] = val;
                slope[i] = der;
            }
            let r = f - t[0];
            loss += w * r * r;
            let scale = -w * r;

            let mut chain = 1.0;
            let mut at = 0;
            for i in 0..depth {
                let y = t[i + 1];
                if i == 0 {
                    let mut pow = 1.0;
                    for g in grad[..counts[0]].iter_mut() {
                        *g += scale * pow;
                        pow *= y;
                    }
                    at = counts[0];
                } else {
                    let free = counts[i] - 2;
                    let mut pow = y;
                    for g in grad[at..at + free].iter_mut() {
                        *g += scale * chain * pow;
                        pow *= y;
                    }
                    at += free;
                }
                chain *= slope[i];
            }
        }
        (0.5 * loss, grad)
    }
}

impl Objective for FitProblem {
    fn dim(&self) -> usize {
        self.signature.dof()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.loss_unchecked(x)
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        self.loss_and_gradient_unchecked(x)
    }
}

#[inline]
fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

#[inline]
fn horner_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut value = 0.0;
    let mut slope = 0.0;
    for &a in c.iter().rev() {
        slope = slope * x + value;
        value = value * x + a;
    }
    (value, slope)
}
