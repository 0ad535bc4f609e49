//! Dense monomial-basis polynomials and their compositions.
//!
//! A [`Polynomial`] stores ascending coefficients `a_0, …, a_d`. The declared
//! degree is `len - 1`; trailing zeros are kept, so a layer keeps its slot in a
//! composite even when an optimizer drives its leading coefficient to zero.
//!
//! A [`DeepPolynomial`] is the composite `p_1 ∘ p_2 ∘ ⋯ ∘ p_L`, stored
//! outermost first. Normalization rewrites a composite so that every inner
//! layer is monic with a zero constant term, which removes the scale/shift
//! redundancy between neighbouring layers without changing the composite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the degree of an expanded composite.
pub const DEFAULT_DEGREE_CAP: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for Polynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidSignature("polynomial needs at least one coefficient".into()));
        }
        Ok(Self { coeffs })
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients.
    ///
    /// Panics if `coeffs` is empty; use `Polynomial::try_from` for fallible input.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Self { coeffs: vec![c] }
    }

    /// The identity map `x`.
    pub fn identity() -> Self {
        Self { coeffs: vec![0.0, 1.0] }
    }

    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = vec![0.0; degree + 1];
        coeffs[degree] = 1.0;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Declared degree, `len(coeffs) - 1`.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Monic with zero constant term (a degree-0 layer never qualifies).
    pub fn is_normalized_layer(&self) -> bool {
        self.degree() >= 1 && self.leading() == 1.0 && self.coeffs[0] == 0.0
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut value = 0.0;
        let mut slope = 0.0;
        for &c in self.coeffs.iter().rev() {
            slope = slope * x + value;
            value = value * x + c;
        }
        (value, slope)
    }

    pub fn derivative(&self) -> Polynomial {
        if self.coeffs.len() == 1 {
            return Polynomial::constant(0.0);
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect();
        Polynomial { coeffs }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|k| self.coeffs.get(k).copied().unwrap_or(0.0) + other.coeffs.get(k).copied().unwrap_or(0.0))
            .collect();
        Polynomial { coeffs }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial { coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// Product with exact degree bookkeeping: the declared degree of the
    /// result is the sum of the declared degrees.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial { coeffs }
    }

    /// `self ∘ inner`, i.e. `x ↦ self(inner(x))`, expanded by Horner's scheme
    /// over polynomials. The declared degree is `deg(self) · deg(inner)`.
    pub fn compose(&self, inner: &Polynomial) -> Polynomial {
        let mut acc = Polynomial::constant(self.leading());
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(inner);
            acc.coeffs[0] += c;
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeepPolynomial {
    layers: Vec<Polynomial>,
    normalized: bool,
}

impl DeepPolynomial {
    /// Builds a composite from layers listed outermost first. The
    /// `normalized` flag is derived from the layers.
    pub fn new(layers: Vec<Polynomial>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidSignature("a composite needs at least one layer".into()));
        }
        let normalized = layers[1..].iter().all(Polynomial::is_normalized_layer);
        Ok(Self { layers, normalized })
    }

    pub fn layers(&self) -> &[Polynomial] {
        &self.layers
    }

    pub fn into_layers(self) -> Vec<Polynomial> {
        self.layers
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Product of the declared layer degrees.
    pub fn degree(&self) -> usize {
        self.layers.iter().map(Polynomial::degree).product()
    }

    pub fn degrees_of_freedom(&self) -> usize {
        let counts: Vec<usize> = self.layers.iter().map(|p| p.coeffs().len()).collect();
        degrees_of_freedom(&counts)
    }

    /// Nested evaluation `p_1(p_2(⋯ p_L(x)))`.
    pub fn eval(&self, x: f64) -> f64 {
        self.layers.iter().rev().fold(x, |y, p| p.eval(y))
    }

    /// Expands the composite with the default degree cap.
    pub fn expand(&self) -> Result<Polynomial> {
        self.expand_with_cap(DEFAULT_DEGREE_CAP)
    }

    pub fn expand_with_cap(&self, cap: usize) -> Result<Polynomial> {
        let degree = self.layers.iter().try_fold(1usize, |acc, p| acc.checked_mul(p.degree()));
        match degree {
            Some(d) if d <= cap => {}
            Some(d) => return Err(Error::DegreeCapExceeded { degree: d, cap }),
            None => return Err(Error::DegreeCapExceeded { degree: usize::MAX, cap }),
        }
        let mut layers = self.layers.iter().rev();
        let innermost = layers.next().expect("at least one layer").clone();
        Ok(layers.fold(innermost, |inner, outer| outer.compose(&inner)))
    }
}

/// Rewrites `q ∘ p` as `q̃ ∘ p̃` with `p̃` monic and `p̃(0) = 0`.
///
/// With `p = a_e x^e + ⋯ + a_0` and `s = a_0 / a_e`, the new layers are
/// `p̃ = (p - a_0) / a_e` and `q̃_j = Σ_{i≥j} b_i a_e^i C(i, j) s^(i-j)`.
pub fn normalize_pair(q: &Polynomial, p: &Polynomial) -> Result<(Polynomial, Polynomial)> {
    let lead = p.leading();
    if lead == 0.0 || p.degree() == 0 {
        return Err(Error::SingularLeadingCoefficient { layer: 1 });
    }
    if p.is_normalized_layer() {
        return Ok((q.clone(), p.clone()));
    }
    let shift = p.coeffs()[0] / lead;

    let mut p_tilde: Vec<f64> = p.coeffs().iter().map(|c| c / lead).collect();
    p_tilde[0] = 0.0;
    *p_tilde.last_mut().unwrap() = 1.0;

    let b = q.coeffs();
    let d = q.degree();
    // b_i a_e^i, reused for every output coefficient
    let scaled: Vec<f64> = b.iter().enumerate().map(|(i, &bi)| bi * lead.powi(i as i32)).collect();
    let mut q_tilde = vec![0.0; d + 1];
    for (j, out) in q_tilde.iter_mut().enumerate() {
        let mut binom = 1.0; // C(j, j)
        let mut shift_pow = 1.0;
        let mut acc = 0.0;
        for (i, &si) in scaled.iter().enumerate().skip(j) {
            if i > j {
                binom = binom * i as f64 / (i - j) as f64;
                shift_pow *= shift;
            }
            acc += si * binom * shift_pow;
        }
        *out = acc;
    }
    Ok((Polynomial::new(q_tilde), Polynomial::new(p_tilde)))
}

/// Normalizes every layer below the outermost, pairing layers from the
/// inside out. The composite is unchanged as a polynomial.
pub fn normalize_chain(g: &DeepPolynomial) -> Result<DeepPolynomial> {
    let mut layers = g.layers.clone();
    for (i, layer) in layers.iter().enumerate().skip(1) {
        if layer.leading() == 0.0 || layer.degree() == 0 {
            return Err(Error::SingularLeadingCoefficient { layer: i });
        }
    }
    for i in (1..layers.len()).rev() {
        let (outer, inner) = normalize_pair(&layers[i - 1], &layers[i])
            .map_err(|_| Error::SingularLeadingCoefficient { layer: i })?;
        layers[i - 1] = outer;
        layers[i] = inner;
    }
    Ok(DeepPolynomial { layers, normalized: true })
}

/// Free parameters of a normalized composite with the given per-layer
/// coefficient counts: `Σ μ_i - 2(L - 1)`.
pub fn degrees_of_freedom(counts: &[usize]) -> usize {
    if counts.is_empty() {
        return 0;
    }
    let total: usize = counts.iter().sum();
    total - 2 * (counts.len() - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec())
    }

    fn assert_coeffs_close(a: &Polynomial, b: &Polynomial, tol: f64) {
        assert_eq!(a.coeffs().len(), b.coeffs().len());
        for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
            assert!((x - y).abs() <= tol * (1.0 + y.abs()), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn horner_evaluation() {
        assert_eq!(poly(&[0.0, 1.0]).eval(0.7), 0.7);
        assert_eq!(poly(&[1.0, 0.0, -2.0]).eval(1.0), -1.0);
        // term-by-term: 3 - 0.5 + 2 * 0.25
        let direct = 3.0 - 0.5 + 2.0 * 0.5f64.powi(2);
        assert_eq!(poly(&[3.0, -1.0, 2.0]).eval(0.5), direct);
        assert_eq!(direct, 3.0);
    }

    #[test]
    fn eval_with_derivative_matches_derivative_polynomial() {
        let p = poly(&[1.0, -2.0, 0.5, 3.0]);
        let (v, dv) = p.eval_with_derivative(0.3);
        assert!((v - p.eval(0.3)).abs() < 1e-15);
        assert!((dv - p.derivative().eval(0.3)).abs() < 1e-15);
    }

    #[test]
    fn derivative_power_rule() {
        assert_eq!(poly(&[5.0]).derivative().coeffs(), &[0.0]);
        assert_eq!(poly(&[0.0, 0.0, 1.0]).derivative().coeffs(), &[0.0, 2.0]);
        assert_eq!(poly(&[1.0, 2.0, 3.0, 4.0]).derivative().coeffs(), &[2.0, 6.0, 12.0]);
    }

    #[test]
    fn deep_evaluation() {
        let id = DeepPolynomial::new(vec![Polynomial::identity(), Polynomial::identity()]).unwrap();
        assert_eq!(id.eval(0.3), 0.3);
        let g = DeepPolynomial::new(vec![poly(&[0.0, 0.0, 1.0]), poly(&[1.0, 1.0])]).unwrap();
        assert_eq!(g.eval(1.0), 4.0);
    }

    #[test]
    fn expansion_small_cases() {
        let g = DeepPolynomial::new(vec![poly(&[0.0, 0.0, 1.0]), poly(&[1.0, 1.0])]).unwrap();
        assert_eq!(g.expand().unwrap().coeffs(), &[1.0, 2.0, 1.0]);
        let g = DeepPolynomial::new(vec![poly(&[1.0, 2.0]), poly(&[0.0, 0.0, 0.0, 1.0])]).unwrap();
        assert_eq!(g.expand().unwrap().coeffs(), &[1.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn expansion_respects_cap() {
        let layer = Polynomial::monomial(8);
        let g = DeepPolynomial::new(vec![layer.clone(), layer.clone(), layer]).unwrap();
        assert_eq!(g.degree(), 512);
        assert!(g.expand().is_ok());
        assert_eq!(
            g.expand_with_cap(100),
            Err(Error::DegreeCapExceeded { degree: 512, cap: 100 })
        );
    }

    #[test]
    fn linear_pair_normalizes_to_identity_inner() {
        // q = b1 y + b0, p = a1 x + a0  =>  q(p(x)) = a1 b1 x + (a0 b1 + b0)
        let (b0, b1, a0, a1) = (0.7, -1.3, 0.4, 2.5);
        let (qt, pt) = normalize_pair(&poly(&[b0, b1]), &poly(&[a0, a1])).unwrap();
        assert_eq!(pt.coeffs(), &[0.0, 1.0]);
        assert!((qt.coeffs()[1] - a1 * b1).abs() < 1e-15);
        assert!((qt.coeffs()[0] - (a0 * b1 + b0)).abs() < 1e-15);
    }

    #[test]
    fn normalized_pair_is_a_fixed_point() {
        let q = poly(&[0.3, -1.0, 2.0]);
        let p = poly(&[0.0, 0.5, 1.0]);
        let (qt, pt) = normalize_pair(&q, &p).unwrap();
        assert_eq!(qt, q);
        assert_eq!(pt, p);
    }

    #[test]
    fn normalize_pair_preserves_expansion() {
        let q = poly(&[0.0, 0.0, 1.0]);
        let p = poly(&[1.0, 2.0]);
        let (qt, pt) = normalize_pair(&q, &p).unwrap();
        let before = q.compose(&p);
        let after = qt.compose(&pt);
        assert_coeffs_close(&after, &before, 1e-12);
        assert_eq!(qt.degree(), q.degree());
        assert_eq!(pt.degree(), p.degree());
    }

    #[test]
    fn normalize_pair_rejects_zero_leading_coefficient() {
        let err = normalize_pair(&poly(&[1.0, 1.0]), &poly(&[1.0, 2.0, 0.0])).unwrap_err();
        assert_eq!(err, Error::SingularLeadingCoefficient { layer: 1 });
    }

    #[test]
    fn chain_of_two_matches_pair() {
        let q = poly(&[0.2, 1.1, -0.4]);
        let p = poly(&[0.5, -0.3, 1.7]);
        let chain = normalize_chain(&DeepPolynomial::new(vec![q.clone(), p.clone()]).unwrap()).unwrap();
        let (qt, pt) = normalize_pair(&q, &p).unwrap();
        assert_eq!(chain.layers(), &[qt, pt]);
        assert!(chain.is_normalized());
    }

    #[test]
    fn chain_of_three_preserves_expansion() {
        let g = DeepPolynomial::new(vec![
            poly(&[0.3, -0.8, 1.2]),
            poly(&[-0.4, 0.9, 1.5]),
            poly(&[0.25, 1.1, -0.7]),
        ])
        .unwrap();
        let n = normalize_chain(&g).unwrap();
        assert_coeffs_close(&n.expand().unwrap(), &g.expand().unwrap(), 1e-10);
        for layer in &n.layers()[1..] {
            assert!(layer.is_normalized_layer());
        }
    }

    #[test]
    fn normalized_chain_is_unchanged() {
        let g = DeepPolynomial::new(vec![
            poly(&[0.3, -0.8, 1.2]),
            poly(&[0.0, 0.9, 1.0]),
            poly(&[0.0, -0.2, 1.0]),
        ])
        .unwrap();
        assert!(g.is_normalized());
        assert_eq!(normalize_chain(&g).unwrap(), g);
    }

    #[test]
    fn dof_counts() {
        assert_eq!(degrees_of_freedom(&[5, 5]), 8);
        assert_eq!(degrees_of_freedom(&[5, 5, 5]), 11);
        assert_eq!(degrees_of_freedom(&[7]), 7);
        assert_eq!(degrees_of_freedom(&[15, 15]), 28);
    }

    #[test]
    fn json_shapes() {
        let p = poly(&[1.0, 0.5]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1.0,0.5]");
        let g = DeepPolynomial::new(vec![poly(&[1.0, 2.0]), poly(&[0.0, 1.0])]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"layers":[[1.0,2.0],[0.0,1.0]],"normalized":true}"#);
        let back: DeepPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Polynomial>("[]").is_err());
    }
}
