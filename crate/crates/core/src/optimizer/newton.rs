//! Newton refinement with a finite-difference Hessian of the analytic
//! gradient and the affine-invariant stop `vᵀHv < tol`, `v = H⁻¹∇F`.

use nalgebra::{DMatrix, DVector};

use super::{Flag, OptimizerConfig};
use crate::objective::Objective;

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Last computed `vᵀHv`.
    pub decrement: f64,
    pub flags: Vec<Flag>,
}

/// Central-difference Jacobian of a vector field, column `j` probed with
/// step `h_j = step · max(1, |x_j|)`.
pub fn fd_jacobian<G>(field: G, x: &[f64], step: f64) -> DMatrix<f64>
where
    G: Fn(&[f64]) -> Vec<f64>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = x.to_vec();
    for j in 0..n {
        let h = step * x[j].abs().max(1.0);
        probe[j] = x[j] + h;
        let up = field(&probe);
        probe[j] = x[j] - h;
        let down = field(&probe);
        probe[j] = x[j];
        for i in 0..n {
            jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
        }
    }
    jac
}

/// Symmetrized central-difference Hessian of `obj`.
pub fn fd_hessian<O: Objective + ?Sized>(obj: &O, x: &[f64], step: f64) -> DMatrix<f64> {
    let jac = fd_jacobian(|p| obj.gradient(p), x, step);
    (&jac + jac.transpose()) * 0.5
}

/// Solves `A v = b` by LU; falls back to an SVD least-squares solution when
/// the factorization fails or yields non-finite values. The flag reports
/// whether the fallback was used.
pub fn solve_or_pseudo(a: &DMatrix<f64>, b: &[f64]) -> (Vec<f64>, bool) {
    let rhs = DVector::from_column_slice(b);
    if let Some(v) = a.clone().lu().solve(&rhs) {
        if v.iter().all(|x| x.is_finite()) {
            return (v.as_slice().to_vec(), false);
        }
    }
    let svd = a.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let eps = max_sv * a.nrows() as f64 * f64::EPSILON;
    let v = svd.solve(&rhs, eps).map(|v| v.as_slice().to_vec()).unwrap_or_else(|_| vec![0.0; b.len()]);
    let v = if v.iter().all(|x| x.is_finite()) { v } else { vec![0.0; b.len()] };
    (v, true)
}

/// Damped Newton iteration from `x0`. The loss never increases: a step that
/// does not decrease it is halved up to `cfg.max_halvings` times, after
/// which the iteration stops.
pub fn newton_refine<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimizerConfig) -> NewtonOutcome {
    let mut x = x0.to_vec();
    let mut f = obj.value(&x);
    let mut flags = Vec::new();
    let mut decrement = f64::NAN;
    let mut iterations = 0;
    if !f.is_finite() {
        flags.push(Flag::Diverged);
        return NewtonOutcome { x, value: f, iterations, decrement, flags };
    }

    while iterations < cfg.max_newton_iters {
        let grad = obj.gradient(&x);
        let hess = fd_hessian(obj, &x, cfg.fd_step);
        let (v, pseudo) = solve_or_pseudo(&hess, &grad);
        if pseudo && !flags.contains(&Flag::SingularHessian) {
            flags.push(Flag::SingularHessian);
        }
        // vᵀHv = vᵀ∇F for the exact solve
        decrement = v.iter().zip(&grad).map(|(a, b)| a * b).sum::<f64>();
        if decrement.abs() < cfg.newton_stop {
            break;
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi - step * vi).collect();
            let ft = obj.value(&trial);
            if ft.is_finite() && ft <= f {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        iterations += 1;
        match accepted {
            Some((trial, ft)) => {
                x = trial;
                f = ft;
            }
            None => {
                flags.push(Flag::NoDescent);
                break;
            }
        }
    }
    if iterations == cfg.max_newton_iters && decrement.abs() >= cfg.newton_stop {
        flags.push(Flag::MaxIterations);
    }
    NewtonOutcome { x, value: f, iterations, decrement, flags }
}
