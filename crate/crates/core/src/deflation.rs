//! Deflated Newton search for further local minima.
//!
//! The deflation operator is the scalar multiple `M(u) = μ(u) I` with
//! `μ(u) = 1 / (Π_i ‖u - r_i‖)^α + β`, applied to `∇F`. A root of
//! `G = μ ∇F` away from the known minimizers `r_i` is a stationary point of
//! `F`, while the known ones are pushed out of reach.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::optimizer::{fd_hessian, fd_jacobian, local_minimize, solve_or_pseudo, Flag, OptimizerConfig};

/// Distance below which an iterate counts as sitting on a known root.
pub const ROOT_PROXIMITY: f64 = 1e-9;
/// Distance below which a round's minimizer duplicates a known one.
pub const DUPLICATE_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Central differences of `G`.
    #[default]
    FiniteDifference,
    /// `μ H + ∇F ∇μᵀ` with `H` the finite-difference Hessian of `F`.
    Assembled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationState {
    pub roots: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
    /// Offset added to every coordinate of a root to start a round.
    pub perturb: f64,
    /// Newton step length `s`.
    pub step: f64,
    pub jacobian: JacobianMode,
}

impl Default for DeflationState {
    fn default() -> Self {
        Self { roots: Vec::new(), alpha: 2.0, beta: 1.0, perturb: 1e-3, step: 1.0, jacobian: JacobianMode::default() }
    }
}

impl DeflationState {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let s = Self { alpha, beta, ..Default::default() };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig("alpha must be at least 1".into()));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidConfig("beta must be non-negative".into()));
        }
        if !(self.perturb > 0.0 && self.perturb.is_finite()) {
            return Err(Error::InvalidConfig("perturb must be positive".into()));
        }
        if !(self.step >= 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidConfig("step must be non-negative".into()));
        }
        Ok(())
    }

    fn distances(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.roots
            .iter()
            .enumerate()
            .map(|(index, r)| {
                let d = distance(u, r);
                if d == 0.0 {
                    Err(Error::AtKnownRoot { index })
                } else {
                    Ok(d)
                }
            })
            .collect()
    }

    fn nearest_root(&self, u: &[f64]) -> Option<(usize, f64)> {
        self.roots
            .iter()
            .map(|r| distance(u, r))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `μ(u)`; `1 + β` when there are no roots.
pub fn deflation_factor(u: &[f64], state: &DeflationState) -> Result<f64> {
    let d = state.distances(u)?;
    let prod: f64 = d.iter().product();
    Ok(prod.powf(-state.alpha) + state.beta)
}

/// `∇μ = -α (Π d_i)^{-α} Σ (u - r_i) / d_i²`.
pub fn deflation_factor_gradient(u: &[f64], state: &DeflationState) -> Result<Vec<f64>> {
    let d = state.distances(u)?;
    let lead = -state.alpha * d.iter().product::<f64>().powf(-state.alpha);
    let mut g = vec![0.0; u.len()];
    for (r, di) in state.roots.iter().zip(&d) {
        for ((gk, uk), rk) in g.iter_mut().zip(u).zip(r) {
            *gk += lead * (uk - rk) / (di * di);
        }
    }
    Ok(g)
}

/// `G(u) = μ(u) ∇F(u)`.
pub fn deflated_gradient<O: Objective + ?Sized>(u: &[f64], obj: &O, state: &DeflationState) -> Result<Vec<f64>> {
    let mu = deflation_factor(u, state)?;
    Ok(obj.gradient(u).into_iter().map(|g| mu * g).collect())
}

/// `K = DG`, by central differences of `G` (step `fd_step · max(1, |u_j|)`)
/// or assembled from the Hessian of `F`, per `state.jacobian`.
pub fn deflated_jacobian<O: Objective + ?Sized>(
    u: &[f64],
    obj: &O,
    state: &DeflationState,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    match state.jacobian {
        JacobianMode::FiniteDifference => {
            state.distances(u)?;
            // probes may land on a root only in degenerate cases; they then read as NaN
            Ok(fd_jacobian(
                |p| deflated_gradient(p, obj, state).unwrap_or_else(|_| vec![f64::NAN; p.len()]),
                u,
                fd_step,
            ))
        }
        JacobianMode::Assembled => {
            let mu = deflation_factor(u, state)?;
            let dmu = deflation_factor_gradient(u, state)?;
            let grad = obj.gradient(u);
            let n = u.len();
            let h = fd_hessian(obj, u, fd_step);
            Ok(h * mu + DMatrix::from_fn(n, n, |i, j| grad[i] * dmu[j]))
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeflateStep {
    pub x: Vec<f64>,
    /// `vᵀKv` with `Kv = G`.
    pub decrement: f64,
    pub singular: bool,
}

/// One deflated Newton step `x - s v`, `K v = G`.
pub fn deflate_step<O: Objective + ?Sized>(
    x: &[f64],
    obj: &O,
    state: &DeflationState,
    fd_step: f64,
) -> Result<DeflateStep> {
    let g = deflated_gradient(x, obj, state)?;
    let k = deflated_jacobian(x, obj, state, fd_step)?;
    let (v, singular) = solve_or_pseudo(&k, &g);
    let kv = &k * nalgebra::DVector::from_column_slice(&v);
    let decrement = v.iter().zip(kv.iter()).map(|(a, b)| a * b).sum();
    let x = x.iter().zip(&v).map(|(xi, vi)| xi - state.step * vi).collect();
    Ok(DeflateStep { x, decrement, singular })
}

#[derive(Debug, Clone)]
pub struct DeflatedNewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub flags: Vec<Flag>,
}

fn push_flag(flags: &mut Vec<Flag>, f: Flag) {
    if !flags.contains(&f) {
        flags.push(f);
    }
}

/// Deflated Newton from `x0` for at most `cfg.max_newton_iters` steps,
/// stopping once `|vᵀKv| < cfg.newton_stop`.
pub fn deflated_newton<O: Objective + ?Sized>(
    obj: &O,
    x0: &[f64],
    state: &DeflationState,
    cfg: &OptimizerConfig,
) -> Result<DeflatedNewtonOutcome> {
    state.validate()?;
    let mut x = x0.to_vec();
    let mut flags = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_newton_iters {
        if let Some((i, d)) = state.nearest_root(&x) {
            if d < ROOT_PROXIMITY {
                x = state.roots[i].iter().map(|r| r + state.perturb).collect();
            }
        }
        let step = deflate_step(&x, obj, state, cfg.fd_step)?;
        if step.singular {
            push_flag(&mut flags, Flag::SingularJacobian);
        }
        if step.decrement.abs() < cfg.newton_stop {
            break;
        }
        if !step.x.iter().all(|v| v.is_finite()) {
            push_flag(&mut flags, Flag::Diverged);
            break;
        }
        x = step.x;
        iterations += 1;
    }
    if iterations == cfg.max_newton_iters {
        push_flag(&mut flags, Flag::MaxIterations);
    }
    Ok(DeflatedNewtonOutcome { x, iterations, flags })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeflationRound {
    pub round: usize,
    pub root: Vec<f64>,
    /// Objective value at `root`.
    pub value: f64,
    /// `sqrt(2 F)`.
    pub error: f64,
    pub duplicate: bool,
    /// Deflated Newton steps taken (0 for the undeflated first round).
    pub inner_iters: usize,
    pub flags: Vec<Flag>,
}

/// Repeated deflation: minimize from `init` to get `r_1`; then each round
/// runs deflated Newton from the latest minimizer plus `perturb`, minimizes
/// `F` (BFGS then Newton) from its output, and records the new minimizer.
/// Minimizers within [`DUPLICATE_DISTANCE`] of a known one are marked as
/// duplicates and not added to the deflation set.
pub fn defmulti<O: Objective + ?Sized>(
    obj: &O,
    init: &[f64],
    n_def: usize,
    state: &DeflationState,
    cfg: &OptimizerConfig,
) -> Result<Vec<DeflationRound>> {
    state.validate()?;
    cfg.validate()?;
    if init.len() != obj.dim() {
        return Err(Error::LengthMismatch { expected: obj.dim(), got: init.len() });
    }
    let mut state = DeflationState { roots: Vec::new(), ..state.clone() };
    let first = local_minimize(obj, init, cfg);
    let mut rounds = vec![round_of(0, first.x.clone(), first.value, false, 0, first.flags)];
    state.roots.push(first.x.clone());
    let mut latest = first.x;

    for round in 1..=n_def {
        let start: Vec<f64> = latest.iter().map(|v| v + state.perturb).collect();
        let inner = deflated_newton(obj, &start, &state, cfg)?;
        let out = local_minimize(obj, &inner.x, cfg);
        let mut flags = inner.flags;
        for f in out.flags {
            push_flag(&mut flags, f);
        }
        let duplicate = state.roots.iter().any(|r| distance(r, &out.x) < DUPLICATE_DISTANCE);
        if duplicate {
            push_flag(&mut flags, Flag::Duplicate);
        } else {
            state.roots.push(out.x.clone());
        }
        latest = out.x.clone();
        rounds.push(round_of(round, out.x, out.value, duplicate, inner.iterations, flags));
    }
    Ok(rounds)
}

fn round_of(round: usize, root: Vec<f64>, value: f64, duplicate: bool, inner_iters: usize, flags: Vec<Flag>) -> DeflationRound {
    let error = if value.is_finite() { (2.0 * value.max(0.0)).sqrt() } else { f64::INFINITY };
    DeflationRound { round, root, value, error, duplicate, inner_iters, flags }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{FitProblem, Signature};
    use crate::quadrature::gauss_legendre;
    use crate::targets::Target;

    /// `(u² - 1)² / 4 + u / 10`: wells near `u = ±1`.
    struct DoubleWell;

    impl Objective for DoubleWell {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            (x[0] * x[0] - 1.0).powi(2) / 4.0 + 0.1 * x[0] + 0.1
        }
        fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
            (self.value(x), vec![x[0] * (x[0] * x[0] - 1.0) + 0.1])
        }
    }

    /// Separable sum of two shifted double wells: four minima.
    struct TwoDofToy;

    impl Objective for TwoDofToy {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, x: &[f64]) -> f64 {
            DoubleWell.value(&x[..1]) + DoubleWell.value(&[0.5 * x[1]])
        }
        fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
            let g0 = DoubleWell.gradient(&x[..1])[0];
            let g1 = 0.5 * DoubleWell.gradient(&[0.5 * x[1]])[0];
            (self.value(x), vec![g0, g1])
        }
    }

    fn with_roots(roots: Vec<Vec<f64>>, alpha: f64, beta: f64) -> DeflationState {
        DeflationState { roots, alpha, beta, ..Default::default() }
    }

    #[test]
    fn factor_values() {
        assert_eq!(deflation_factor(&[0.3], &with_roots(vec![], 2.0, 0.0)).unwrap(), 1.0);
        assert_eq!(deflation_factor(&[0.0, 0.0], &with_roots(vec![vec![2.0, 0.0]], 2.0, 1.0)).unwrap(), 1.25);
        let s = with_roots(vec![vec![2.0, 0.0], vec![0.0, 3.0]], 2.0, 0.0);
        assert!((deflation_factor(&[0.0, 0.0], &s).unwrap() - 1.0 / 36.0).abs() < 1e-16);
        assert!(matches!(
            deflation_factor(&[2.0, 0.0], &s),
            Err(Error::AtKnownRoot { index: 0 })
        ));
    }

    #[test]
    fn factor_tends_to_beta_far_away() {
        let s = with_roots(vec![vec![0.0, 0.0]], 2.0, 1.0);
        let mu = deflation_factor(&[1e6, 0.0], &s).unwrap();
        assert!((mu - 1.0).abs() < 1e-11);
    }

    #[test]
    fn factor_gradient_matches_differences() {
        let s = with_roots(vec![vec![0.5, -0.2], vec![-1.0, 0.4]], 2.0, 1.0);
        let u = [0.1, 0.7];
        let g = deflation_factor_gradient(&u, &s).unwrap();
        for k in 0..2 {
            let h = 1e-6;
            let mut up = u;
            let mut dn = u;
            up[k] += h;
            dn[k] -= h;
            let fd = (deflation_factor(&up, &s).unwrap() - deflation_factor(&dn, &s).unwrap()) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-7 * g[k].abs().max(1.0));
        }
    }

    #[test]
    fn no_new_zeros() {
        let s = with_roots(vec![vec![1.3, 0.2]], 2.0, 1.0);
        for x in [-1.2, -0.4, 0.3, 0.9] {
            for y in [-1.7, -0.5, 0.8, 2.1] {
                let u = [x, y];
                let g = TwoDofToy.gradient(&u);
                let dg = deflated_gradient(&u, &TwoDofToy, &s).unwrap();
                let mu = deflation_factor(&u, &s).unwrap();
                for (a, b) in g.iter().zip(&dg) {
                    assert!((mu * a - b).abs() <= 1e-15 * b.abs().max(1.0));
                    assert_eq!(*a == 0.0, *b == 0.0);
                }
            }
        }
    }

    fn small_problem() -> FitProblem {
        FitProblem::new(Target::tanh(3.0), Signature::new(vec![4, 4]).unwrap(), gauss_legendre(100).unwrap()).unwrap()
    }

    #[test]
    fn jacobian_modes_agree_and_match_refined_oracle() {
        let prob = small_problem();
        let u = [0.05, 1.1, -0.2, -0.4, 0.7, 0.3];
        let mut s = with_roots(vec![vec![0.0, 1.0, 0.0, -0.5, 0.5, 0.0]], 2.0, 1.0);
        let fd = deflated_jacobian(&u, &prob, &s, 1e-5).unwrap();
        s.jacobian = JacobianMode::Assembled;
        let asm = deflated_jacobian(&u, &prob, &s, 1e-5).unwrap();
        assert_eq!((fd.nrows(), fd.ncols()), (6, 6));
        // fourth-order central differences as an independent oracle
        let g = |p: &[f64]| deflated_gradient(p, &prob, &s).unwrap();
        let scale = fd.amax();
        for j in 0..6 {
            let h = 1e-3;
            let at = |t: f64| {
                let mut p = u.to_vec();
                p[j] += t;
                g(&p)
            };
            let (a, b, c, d) = (at(2.0 * h), at(h), at(-h), at(-2.0 * h));
            for i in 0..6 {
                let oracle = (-a[i] + 8.0 * b[i] - 8.0 * c[i] + d[i]) / (12.0 * h);
                assert!((fd[(i, j)] - oracle).abs() <= 1e-4 * scale, "fd ({i},{j})");
                assert!((asm[(i, j)] - oracle).abs() <= 1e-4 * scale, "assembled ({i},{j})");
            }
        }
    }

    #[test]
    fn constant_factor_scales_the_hessian() {
        let prob = small_problem();
        let u = [0.05, 1.1, -0.2, -0.4, 0.7, 0.3];
        let s = with_roots(vec![], 1.0, 2.0);
        let k = deflated_jacobian(&u, &prob, &s, 1e-5).unwrap();
        let h = fd_hessian(&prob, &u, 1e-5);
        assert!((&k - h * 3.0).amax() <= 1e-6 * k.amax());
        assert!((&k - k.transpose()).amax() <= 1e-5 * k.amax());
    }

    #[test]
    fn step_without_roots_is_newton_and_zero_step_is_identity() {
        let prob = small_problem();
        let u = [0.05, 1.1, -0.2, -0.4, 0.7, 0.3];
        let s = with_roots(vec![], 1.0, 0.0);
        let step = deflate_step(&u, &prob, &s, 1e-5).unwrap();
        let h = fd_jacobian(|p| prob.gradient(p).unwrap(), &u, 1e-5);
        let (v, _) = solve_or_pseudo(&h, &prob.gradient(&u).unwrap());
        for i in 0..6 {
            assert!((step.x[i] - (u[i] - v[i])).abs() <= 1e-10 * v[i].abs().max(1.0));
        }
        let frozen = DeflationState { step: 0.0, ..s };
        assert_eq!(deflate_step(&u, &prob, &frozen, 1e-5).unwrap().x, u.to_vec());
    }

    #[test]
    fn double_well_deflation_finds_the_other_well() {
        let cfg = OptimizerConfig::default();
        let state = DeflationState::new(2.0, 1.0).unwrap();
        let rounds = defmulti(&DoubleWell, &[1.2], 1, &state, &cfg).unwrap();
        let (a, b) = (rounds[0].root[0], rounds[1].root[0]);
        assert!(a > 0.5 && b < -0.5, "{a} {b}");
        assert!(!rounds[1].duplicate);
        // both are stationary points of the cubic u³ - u + 0.1
        for r in [a, b] {
            assert!((r * r * r - r + 0.1).abs() < 1e-10);
        }
    }

    #[test]
    fn rounds_never_beat_exhaustive_search_on_toy() {
        use crate::optimizer::trial_init;
        let cfg = OptimizerConfig { newton_refine: false, ..Default::default() };
        let best = (0..10_000u64)
            .map(|t| local_minimize(&TwoDofToy, &trial_init(99, t, 2), &cfg).value)
            .fold(f64::INFINITY, f64::min);
        let cfg = OptimizerConfig::default();
        let state = DeflationState::new(2.0, 1.0).unwrap();
        let rounds = defmulti(&TwoDofToy, &[1.1, 1.9], 4, &state, &cfg).unwrap();
        assert_eq!(rounds.len(), 5);
        for r in &rounds {
            assert!(r.value >= best - 1e-12, "{} < {best}", r.value);
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(DeflationState::new(0.5, 1.0).is_err());
        assert!(DeflationState::new(2.0, -1.0).is_err());
        let s = DeflationState { perturb: 0.0, ..Default::default() };
        assert!(s.validate().is_err());
    }
}
