use deeppoly::optimizer::{bfgs_minimize, fd_hessian, newton_refine};
use deeppoly::{
    fit_deep, gauss_legendre, normalize_chain, normalize_pair, DeepPolynomial, FitProblem, Objective,
    OptimizerConfig, Polynomial, Signature, Target,
};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    -1.0..1.0f64
}

/// A layer of exact degree `d` with leading coefficient bounded away from 0.
fn layer(d: usize) -> impl Strategy<Value = Polynomial> {
    (prop::collection::vec(coeff(), d), 0.3..1.5f64, any::<bool>()).prop_map(move |(mut c, lead, neg)| {
        c.push(if neg { -lead } else { lead });
        Polynomial::new(c)
    })
}

fn chain(max_layers: usize, max_degree: usize) -> impl Strategy<Value = DeepPolynomial> {
    prop::collection::vec(1..=max_degree, 1..=max_layers)
        .prop_flat_map(|degrees| degrees.into_iter().map(layer).collect::<Vec<_>>())
        .prop_map(|layers| DeepPolynomial::new(layers).unwrap())
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| -1.0 + 2.0 * i as f64 / (n - 1) as f64)
}

fn max_coeff_diff(a: &Polynomial, b: &Polynomial) -> f64 {
    let (a, b) = (a.coeffs(), b.coeffs());
    (0..a.len().max(b.len()))
        .map(|i| (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative(p1 in layer(2), p2 in layer(3), p3 in layer(2)) {
        let left = p1.compose(&p2.compose(&p3));
        let right = p1.compose(&p2).compose(&p3);
        prop_assert!(max_coeff_diff(&left, &right) <= 1e-10);
    }

    #[test]
    fn expanded_degree_is_product_of_layer_degrees(g in chain(3, 3)) {
        let expected: usize = g.layers().iter().map(Polynomial::degree).product();
        prop_assert_eq!(g.expand().unwrap().degree(), expected);
    }

    #[test]
    fn normalization_preserves_the_composite(g in chain(4, 3)) {
        let n = normalize_chain(&g).unwrap();
        prop_assert!(n.is_normalized());
        let scale = 1.0 + grid(100).map(|x| g.eval(x).abs()).fold(0.0, f64::max);
        let worst = grid(100).map(|x| (g.eval(x) - n.eval(x)).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-9 * scale, "{} vs {}", worst, scale);
    }

    /// The affine freedom between two layers is the only ambiguity: every
    /// `(q ∘ φ⁻¹, φ ∘ p)` normalizes to the same pair.
    #[test]
    fn normalized_pair_is_unique(
        q in layer(3),
        p in layer(2),
        alpha in prop_oneof![0.4..2.5f64, -2.5..-0.4f64],
        beta in -1.5..1.5f64,
    ) {
        let (q0, p0) = normalize_pair(&q, &p).unwrap();
        let (q1, p1) = normalize_pair(&q0, &p0).unwrap();
        prop_assert!(max_coeff_diff(&q0, &q1) <= 1e-12 && max_coeff_diff(&p0, &p1) <= 1e-12);

        let phi = Polynomial::new(vec![beta, alpha]);
        let phi_inv = Polynomial::new(vec![-beta / alpha, 1.0 / alpha]);
        let (q2, p2) = normalize_pair(&q.compose(&phi_inv), &phi.compose(&p)).unwrap();
        let tol = 1e-9 * q0.coeffs().iter().fold(1.0, |m: f64, c| m.max(c.abs()));
        prop_assert!(max_coeff_diff(&p0, &p2) <= 1e-9);
        prop_assert!(max_coeff_diff(&q0, &q2) <= tol);
    }

    #[test]
    fn quadrature_is_exact_to_degree_199(c in prop::collection::vec(coeff(), 200)) {
        let rule = gauss_legendre(100).unwrap();
        let p = Polynomial::new(c.clone());
        let exact: f64 = c.iter().enumerate().map(|(k, a)| if k % 2 == 0 { 2.0 * a / (k as f64 + 1.0) } else { 0.0 }).sum();
        prop_assert!((rule.sum(|x| p.eval(x)) - exact).abs() <= 1e-11);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn gradient_matches_central_differences(
        which in 0usize..3,
        x in prop::collection::vec(-1.0..1.0f64, 11),
    ) {
        let counts = [vec![4, 4], vec![5, 5], vec![5, 5, 5]][which].clone();
        let prob = FitProblem::new(Target::runge(25.0), Signature::new(counts).unwrap(), gauss_legendre(100).unwrap()).unwrap();
        let x = &x[..prob.dim()];
        let g = prob.gradient(x).unwrap();
        let scale = g.iter().map(|v| v.abs()).fold(1e-8, f64::max);
        for i in 0..x.len() {
            let h = 1e-6 * x[i].abs().max(1.0);
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[i] += h;
            xm[i] -= h;
            let fd = (prob.loss(&xp).unwrap() - prob.loss(&xm).unwrap()) / (2.0 * h);
            prop_assert!((g[i] - fd).abs() <= 1e-5 * scale, "component {}: {} vs {}", i, g[i], fd);
        }
    }

    /// With a polynomial target of low degree the integrands are exact.
    #[test]
    fn polynomial_target_gradient_is_exact(x in prop::collection::vec(-1.0..1.0f64, 4)) {
        let target = Target::poly(vec![0.5, -1.0, 0.25, 2.0]);
        let prob = FitProblem::new(target, Signature::new(vec![3, 3]).unwrap(), gauss_legendre(100).unwrap()).unwrap();
        let g = prob.gradient(&x).unwrap();
        let scale = g.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for i in 0..x.len() {
            let h = 1e-4;
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[i] += h;
            xm[i] -= h;
            // the loss is a polynomial of degree 4 in each coordinate: the
            // five-point stencil is exact up to rounding
            let (mut xpp, mut xmm) = (x.clone(), x.clone());
            xpp[i] += 2.0 * h;
            xmm[i] -= 2.0 * h;
            let l = |v: &[f64]| prob.loss(v).unwrap();
            let fd = (8.0 * (l(&xp) - l(&xm)) - (l(&xpp) - l(&xmm))) / (12.0 * h);
            prop_assert!((g[i] - fd).abs() <= 1e-9 * scale, "component {}: {} vs {}", i, g[i], fd);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn seeded_fits_are_byte_identical(seed in any::<u64>()) {
        let prob = FitProblem::new(Target::runge(25.0), Signature::new(vec![4, 4]).unwrap(), gauss_legendre(100).unwrap()).unwrap();
        let cfg = OptimizerConfig { n_trials: 3, seed, ..Default::default() };
        let a = fit_deep(&prob, &cfg).unwrap();
        let b = fit_deep(&prob, &OptimizerConfig { threads: Some(2), ..cfg.clone() }).unwrap();
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let min = a.errors().into_iter().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(a.l2_error, min);
        prop_assert_eq!(a.trials.len(), 3);
    }
}

fn condition(obj: &dyn Objective, x: &[f64]) -> f64 {
    let sv = fd_hessian(obj, x, 1e-5).svd(false, false).singular_values;
    sv.max() / sv.min()
}

/// Random start on Runge (3,5) after a few BFGS steps, a near-identity `A`,
/// and the mapped start.
fn reparam_case(entries: Vec<f64>, start: &[f64]) -> (FitProblem, DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let prob = FitProblem::new(Target::runge(25.0), Signature::new(vec![3, 5]).unwrap(), gauss_legendre(100).unwrap()).unwrap();
    let v0 = bfgs_minimize(&prob, start, &OptimizerConfig { max_bfgs_iters: 20, ..Default::default() }).x;
    let a = DMatrix::from_vec(6, 6, entries) + DMatrix::identity(6, 6);
    let w0 = a.clone().try_inverse().unwrap() * DVector::from_column_slice(&v0);
    (prob, a, v0, w0.as_slice().to_vec())
}

/// `max |A w_k - v_k|`, a scale for it, and whether both runs took exactly
/// `max_newton_iters` steps.
fn mapped_gap<O: Objective>(obj: &O, re: &dyn Objective, a: &DMatrix<f64>, v0: &[f64], w0: &[f64], cfg: &OptimizerConfig) -> (f64, f64, bool) {
    let v = newton_refine(obj, v0, cfg);
    let w = newton_refine(re, w0, cfg);
    let mapped = a * DVector::from_column_slice(&w.x);
    let gap = (mapped - DVector::from_column_slice(&v.x)).amax();
    let scale = v.x.iter().fold(1.0, |m: f64, c| m.max(c.abs()));
    (gap, scale, v.iterations == cfg.max_newton_iters && w.iterations == cfg.max_newton_iters)
}

/// `½ vᵀQv + rᵀv + (cᵀv)³ / 6`: its gradient is quadratic, so central
/// differences of it are exact up to rounding.
struct Cubic {
    q: DMatrix<f64>,
    r: DVector<f64>,
    c: DVector<f64>,
}

impl Objective for Cubic {
    fn dim(&self) -> usize {
        self.r.len()
    }

    fn value(&self, v: &[f64]) -> f64 {
        let v = DVector::from_column_slice(v);
        let t = self.c.dot(&v);
        0.5 * v.dot(&(&self.q * &v)) + self.r.dot(&v) + t * t * t / 6.0
    }

    fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let v = DVector::from_column_slice(x);
        let t = self.c.dot(&v);
        let g = &self.q * &v + &self.r + &self.c * (0.5 * t * t);
        (self.value(x), g.as_slice().to_vec())
    }
}

/// `O(A w)` for a fixed invertible `A`.
struct Mapped<'a, O> {
    inner: &'a O,
    a: DMatrix<f64>,
}

impl<O: Objective> Objective for Mapped<'_, O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let v = &self.a * DVector::from_column_slice(w);
        self.inner.value(v.as_slice())
    }

    fn value_and_gradient(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let v = &self.a * DVector::from_column_slice(w);
        let (f, g) = self.inner.value_and_gradient(v.as_slice());
        let gw = self.a.transpose() * DVector::from_vec(g);
        (f, gw.as_slice().to_vec())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Newton on `F(A w)` from `A⁻¹ v₀` visits `A⁻¹ v_k`, including the
    /// stopping step, on an objective whose difference Hessian is exact.
    #[test]
    fn newton_is_affine_invariant(
        m in prop::collection::vec(-0.5..0.5f64, 25),
        r in prop::collection::vec(-0.5..0.5f64, 5),
        c in prop::collection::vec(-0.5..0.5f64, 5),
        entries in prop::collection::vec(-0.3..0.3f64, 25),
        start in prop::collection::vec(-0.5..0.5f64, 5),
    ) {
        let m = DMatrix::from_vec(5, 5, m);
        let obj = Cubic { q: DMatrix::identity(5, 5) + &m * m.transpose(), r: DVector::from_vec(r), c: DVector::from_vec(c) };
        let a = DMatrix::from_vec(5, 5, entries) + DMatrix::identity(5, 5);
        prop_assume!(a.clone().svd(false, false).singular_values.min() > 0.2);
        let w0 = a.clone().try_inverse().unwrap() * DVector::from_column_slice(&start);
        let re = Mapped { inner: &obj, a: a.clone() };
        for steps in 1..=4 {
            let cfg = OptimizerConfig { max_newton_iters: steps, ..Default::default() };
            let (gap, scale, _) = mapped_gap(&obj, &re, &a, &start, w0.as_slice(), &cfg);
            prop_assert!(gap <= 1e-8 * scale, "after {} steps: {:e}", steps, gap);
            let v = newton_refine(&obj, &start, &cfg);
            let w = newton_refine(&re, w0.as_slice(), &cfg);
            prop_assert_eq!(v.iterations, w.iterations);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// At the default step the remaining gap is truncation error: it shrinks
    /// by about 100 when the step shrinks by 10.
    #[test]
    fn newton_invariance_gap_is_second_order(
        entries in prop::collection::vec(-0.3..0.3f64, 36),
        start in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let (prob, a, v0, w0) = reparam_case(entries, &start);
        prop_assume!(condition(&prob, &v0) < 1e4);
        let re = Mapped { inner: &prob, a: a.clone() };
        let run = |h: f64| mapped_gap(&prob, &re, &a, &v0, &w0, &OptimizerConfig { max_newton_iters: 1, fd_step: h, ..Default::default() });
        let (coarse, _, ok_c) = run(1e-4);
        let (fine, _, ok_f) = run(1e-5);
        prop_assume!(ok_c && ok_f && coarse > 1e-9);
        let order = (coarse / fine).log10();
        prop_assert!((1.7..=2.3).contains(&order), "gap ratio 10^{}", order);
    }
}
