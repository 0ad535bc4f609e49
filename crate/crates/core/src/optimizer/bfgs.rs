//! Inverse-update BFGS with a strong Wolfe line search.

use super::{Flag, OptimizerConfig};
use crate::objective::Objective;

/// Sufficient-decrease constant.
pub const WOLFE_C1: f64 = 1e-4;
/// Curvature constant.
pub const WOLFE_C2: f64 = 0.9;

const LINE_SEARCH_MAX_ITERS: usize = 20;
const ZOOM_MAX_ITERS: usize = 30;

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient_inf_norm: f64,
    pub iterations: usize,
    pub flag: Option<Flag>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct LinePoint {
    alpha: f64,
    phi: f64,
    dphi: f64,
    grad: Vec<f64>,
}

struct Line<'a, O: Objective + ?Sized> {
    obj: &'a O,
    x: &'a [f64],
    dir: &'a [f64],
    phi0: f64,
    dphi0: f64,
}

impl<O: Objective + ?Sized> Line<'_, O> {
    fn probe(&self, alpha: f64) -> LinePoint {
        let xt: Vec<f64> = self.x.iter().zip(self.dir).map(|(x, d)| x + alpha * d).collect();
        let (phi, grad) = self.obj.value_and_gradient(&xt);
        let dphi = dot(&grad, self.dir);
        LinePoint { alpha, phi, dphi, grad }
    }

    fn armijo_fails(&self, pt: &LinePoint) -> bool {
        !pt.phi.is_finite() || !pt.dphi.is_finite() || pt.phi > self.phi0 + WOLFE_C1 * pt.alpha * self.dphi0
    }

    fn curvature_holds(&self, pt: &LinePoint) -> bool {
        pt.dphi.abs() <= -WOLFE_C2 * self.dphi0
    }

    /// Bracketing phase; returns a point satisfying the strong Wolfe
    /// conditions, or `None`.
    fn search(&self, alpha0: f64) -> Option<LinePoint> {
        let mut prev = LinePoint { alpha: 0.0, phi: self.phi0, dphi: self.dphi0, grad: Vec::new() };
        let mut alpha = alpha0;
        for i in 0..LINE_SEARCH_MAX_ITERS {
            let pt = self.probe(alpha);
            if self.armijo_fails(&pt) || (i > 0 && pt.phi >= prev.phi) {
                return self.zoom(prev, pt);
            }
            if self.curvature_holds(&pt) {
                return Some(pt);
            }
            if pt.dphi >= 0.0 {
                return self.zoom(pt, prev);
            }
            alpha = 2.0 * pt.alpha;
            prev = pt;
        }
        None
    }

    /// Zoom between `lo` (best point so far, satisfying sufficient decrease)
    /// and `hi`.
    fn zoom(&self, mut lo: LinePoint, mut hi: LinePoint) -> Option<LinePoint> {
        let mut older: Option<(f64, f64)> = None;
        for _ in 0..ZOOM_MAX_ITERS {
            let (a, b) = if lo.alpha < hi.alpha { (lo.alpha, hi.alpha) } else { (hi.alpha, lo.alpha) };
            let width = b - a;
            if width <= f64::EPSILON * b.abs().max(1e-300) {
                return None;
            }
            let mut trial = None;
            if hi.phi.is_finite() {
                if let Some((a_old, phi_old)) = older {
                    trial = cubic_min(lo.alpha, lo.phi, lo.dphi, hi.alpha, hi.phi, a_old, phi_old)
                        .filter(|t| *t > a + 0.2 * width && *t < b - 0.2 * width);
                }
                if trial.is_none() {
                    trial = quad_min(lo.alpha, lo.phi, lo.dphi, hi.alpha, hi.phi)
                        .filter(|t| *t > a + 0.1 * width && *t < b - 0.1 * width);
                }
            }
            let alpha = trial.unwrap_or(a + 0.5 * width);
            let pt = self.probe(alpha);
            if self.armijo_fails(&pt) || pt.phi >= lo.phi {
                older = Some((hi.alpha, hi.phi));
                hi = pt;
            } else {
                if self.curvature_holds(&pt) {
                    return Some(pt);
                }
                if pt.dphi * (hi.alpha - lo.alpha) >= 0.0 {
                    older = Some((hi.alpha, hi.phi));
                    hi = lo;
                } else {
                    older = Some((lo.alpha, lo.phi));
                }
                lo = pt;
            }
        }
        None
    }
}

/// Minimizer of the quadratic through `(a, fa)`, slope `fpa` at `a`, and `(b, fb)`.
fn quad_min(a: f64, fa: f64, fpa: f64, b: f64, fb: f64) -> Option<f64> {
    let db = b - a;
    let curv = (fb - fa - fpa * db) / (db * db);
    if curv <= 0.0 || !curv.is_finite() {
        return None;
    }
    Some(a - fpa / (2.0 * curv))
}

/// Minimizer of the cubic through `(a, fa)` with slope `fpa`, `(b, fb)` and `(c, fc)`.
fn cubic_min(a: f64, fa: f64, fpa: f64, b: f64, fb: f64, c: f64, fc: f64) -> Option<f64> {
    let db = b - a;
    let dc = c - a;
    let denom = (db * dc).powi(2) * (db - dc);
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    let rb = fb - fa - fpa * db;
    let rc = fc - fa - fpa * dc;
    let ca = (dc * dc * rb - db * db * rc) / denom;
    let cb = (-dc * dc * dc * rb + db * db * db * rc) / denom;
    let radical = cb * cb - 3.0 * ca * fpa;
    if ca == 0.0 || radical < 0.0 {
        return None;
    }
    let t = a + (-cb + radical.sqrt()) / (3.0 * ca);
    t.is_finite().then_some(t)
}

/// Minimizes `obj` from `x0`. Stops when `‖∇F‖∞ ≤ gtol`; otherwise returns
/// the last accepted iterate with a flag.
pub fn bfgs_minimize<O: Objective + ?Sized>(obj: &O, x0: &[f64], cfg: &OptimizerConfig) -> BfgsOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut f, mut g) = obj.value_and_gradient(&x);
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return BfgsOutcome { x, value: f64::INFINITY, gradient_inf_norm: f64::INFINITY, iterations: 0, flag: Some(Flag::Diverged) };
    }
    // inverse Hessian approximation, row-major
    let mut h = identity(n);
    let mut old_f = f + 0.5 * dot(&g, &g).sqrt();
    let mut flag = Some(Flag::MaxIterations);
    let mut iterations = 0;

    while iterations < cfg.max_bfgs_iters {
        if inf_norm(&g) <= cfg.gtol {
            flag = None;
            break;
        }
        let mut dir = mat_vec(&h, &g, n);
        dir.iter_mut().for_each(|d| *d = -*d);
        let mut dphi0 = dot(&g, &dir);
        if !(dphi0 < 0.0) {
            h = identity(n);
            dir = g.iter().map(|v| -v).collect();
            dphi0 = dot(&g, &dir);
        }
        let alpha0 = {
            let guess = 1.01 * 2.0 * (f - old_f) / dphi0;
            if guess.is_finite() && guess > 0.0 { guess.min(1.0) } else { 1.0 }
        };
        let line = Line { obj, x: &x, dir: &dir, phi0: f, dphi0 };
        let Some(pt) = line.search(alpha0) else {
            flag = Some(Flag::LineSearchFailure);
            break;
        };
        iterations += 1;

        let s: Vec<f64> = dir.iter().map(|d| pt.alpha * d).collect();
        let y: Vec<f64> = pt.grad.iter().zip(&g).map(|(a, b)| a - b).collect();
        x.iter_mut().zip(&s).for_each(|(xi, si)| *xi += si);
        old_f = f;
        f = pt.phi;
        g = pt.grad;

        let ys = dot(&y, &s);
        if ys > 0.0 && ys.is_finite() {
            update_inverse(&mut h, &s, &y, ys, n);
        }
    }
    if flag.is_none() || inf_norm(&g) <= cfg.gtol {
        flag = None;
    }
    BfgsOutcome { gradient_inf_norm: inf_norm(&g), x, value: f, iterations, flag }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| dot(&h[i * n..(i + 1) * n], v)).collect()
}

/// `H ← (I - ρ s yᵀ) H (I - ρ y sᵀ) + ρ s sᵀ`, expanded for symmetric H.
fn update_inverse(h: &mut [f64], s: &[f64], y: &[f64], ys: f64, n: usize) {
    let rho = 1.0 / ys;
    let hy = mat_vec(h, y, n);
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}
