//! Potentials of equispaced and Chebyshev node measures, the Runge region,
//! and equispaced interpolation after a change of variables `x = x(z)`.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{l2_error, QuadratureRule};
use crate::targets::Target;

/// `s ↦ (s ± 1) log(s ± 1)` with the removable zero at the branch point.
fn xlogx(w: Complex64) -> Complex64 {
    if w == Complex64::new(0.0, 0.0) {
        w
    } else {
        w * w.ln()
    }
}

/// `-1 + ½ Re[(s+1) log(s+1) - (s-1) log(s-1)]`, principal logarithms.
pub fn equispaced_potential(s: Complex64) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    -1.0 + 0.5 * (xlogx(s + one) - xlogx(s - one)).re
}

/// Potential level of the critical equipotential through `±1`.
pub fn critical_level() -> f64 {
    equispaced_potential(Complex64::new(1.0, 0.0))
}

/// Strictly inside the critical equipotential through `±1`.
pub fn in_runge_region(s: Complex64) -> bool {
    equispaced_potential(s) < critical_level()
}

/// `log|s + i√(1-s²)| - log 2`, on the branch where the modulus is at least
/// one, so the value is `-log 2` on `[-1, 1]` and continuous elsewhere.
pub fn cheb_potential(s: Complex64) -> f64 {
    let w = (s * s - 1.0).sqrt();
    let m = (s + w).norm().max((s - w).norm());
    m.ln() - LN_2
}

/// Imaginary-axis crossing `t` of the critical equipotential, by bisection
/// of `t ↦ u(it) - u(1)` on `[lo, hi]` to width `tol`.
pub fn critical_crossing(lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| equispaced_potential(Complex64::new(0.0, t)) - critical_level();
    let (mut a, mut b) = (lo, hi);
    let (ga, gb) = (g(a), g(b));
    if !(ga * gb < 0.0) {
        return Err(Error::DomainError(format!("no sign change of the potential on [{lo}, {hi}]")));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        if (g(m) < 0.0) == (ga < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapSpec {
    Identity,
    /// `x = (z + z³) / 2`.
    Cubic,
    /// `x = cos(π (1 - z) / 2)`.
    Cosine,
}

impl MapSpec {
    pub fn forward(self, z: f64) -> f64 {
        match self {
            MapSpec::Identity => z,
            MapSpec::Cubic => 0.5 * (z + z * z * z),
            MapSpec::Cosine => (0.5 * PI * (1.0 - z)).cos(),
        }
    }

    pub fn derivative(self, z: f64) -> f64 {
        match self {
            MapSpec::Identity => 1.0,
            MapSpec::Cubic => 0.5 * (1.0 + 3.0 * z * z),
            MapSpec::Cosine => 0.5 * PI * (0.5 * PI * (1.0 - z)).sin(),
        }
    }

    /// `z(x)` on `[-1, 1]`. The cubic is solved by the real Cardano root
    /// followed by Newton polishing to a residual of `1e-14`.
    pub fn inverse(self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0) {
            return Err(Error::DomainError(format!("x = {x} is outside [-1, 1]")));
        }
        match self {
            MapSpec::Identity => Ok(x),
            MapSpec::Cosine => Ok(1.0 - 2.0 * x.acos() / PI),
            MapSpec::Cubic => {
                // z³ + z - 2x = 0 has one real root
                let d = (x * x + 1.0 / 27.0).sqrt();
                let mut z = (x + d).cbrt() + (x - d).cbrt();
                for _ in 0..50 {
                    let r = z * z * z + z - 2.0 * x;
                    if r.abs() <= 1e-14 {
                        return Ok(z);
                    }
                    z -= r / (3.0 * z * z + 1.0);
                }
                let r = z * z * z + z - 2.0 * x;
                if r.abs() <= 1e-14 {
                    Ok(z)
                } else {
                    Err(Error::InverseMapFailure(x))
                }
            }
        }
    }
}

/// Which variable the barycentric formula runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Z,
    X,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interpolant {
    pub map: MapSpec,
    pub variable: Variable,
    pub z_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Barycentric weights `1 / Π_{k≠j} (t_j - t_k)`, scaled to unit maximum.
pub fn barycentric_weights(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let d = nodes[j] - nodes[k];
                if d == 0.0 {
                    return Err(Error::DuplicateNodes);
                }
                w[j] /= d;
            }
        }
    }
    let scale = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(w.into_iter().map(|v| v / scale).collect())
}

/// Second-kind barycentric formula; exact at nodes.
pub fn barycentric_eval(nodes: &[f64], values: &[f64], weights: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((&tj, &fj), &wj) in nodes.iter().zip(values).zip(weights) {
        let d = t - tj;
        if d == 0.0 {
            return fj;
        }
        let c = wj / d;
        num += c * fj;
        den += c;
    }
    num / den
}

/// `n + 1` reference nodes on `[-1, 1]`: equispaced, except for the cosine
/// map, whose nodes are the cell midpoints `-1 + (2j + 1) / (n + 1)` so that
/// their images are the Chebyshev points of the first kind.
fn reference_nodes(map: MapSpec, n: usize) -> Vec<f64> {
    match map {
        MapSpec::Cosine => (0..=n).map(|j| -1.0 + (2 * j + 1) as f64 / (n + 1) as f64).collect(),
        _ => (0..=n).map(|j| -1.0 + 2.0 * j as f64 / n as f64).collect(),
    }
}

/// Degree-`n` interpolant of `f(x(z))`. For the identity and cubic maps it
/// interpolates in `z` at equispaced nodes; for the cosine map the image
/// nodes are Chebyshev points and the interpolant is a polynomial in `x`.
pub fn interpolate_mapped(target: &Target, map: MapSpec, n: usize) -> Result<Interpolant> {
    if n == 0 {
        return Err(Error::InvalidConfig("interpolation needs n >= 1".into()));
    }
    let z_nodes = reference_nodes(map, n);
    let x_nodes: Vec<f64> = z_nodes.iter().map(|&z| map.forward(z)).collect();
    let values: Vec<f64> = x_nodes.iter().map(|&x| target.eval(x)).collect();
    let variable = if map == MapSpec::Cosine { Variable::X } else { Variable::Z };
    let weights = match variable {
        Variable::Z => barycentric_weights(&z_nodes)?,
        Variable::X => barycentric_weights(&x_nodes)?,
    };
    Ok(Interpolant { map, variable, z_nodes, x_nodes, values, weights })
}

impl Interpolant {
    /// Value at `z` in the reference variable.
    pub fn eval_z(&self, z: f64) -> f64 {
        match self.variable {
            Variable::Z => barycentric_eval(&self.z_nodes, &self.values, &self.weights, z),
            Variable::X => barycentric_eval(&self.x_nodes, &self.values, &self.weights, self.map.forward(z)),
        }
    }
}

/// Value at `x ∈ [-1, 1]`.
pub fn eval_interpolant(itp: &Interpolant, x: f64) -> Result<f64> {
    match itp.variable {
        Variable::X => Ok(barycentric_eval(&itp.x_nodes, &itp.values, &itp.weights, x)),
        Variable::Z => {
            let z = itp.map.inverse(x)?;
            Ok(barycentric_eval(&itp.z_nodes, &itp.values, &itp.weights, z))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub l2_error: f64,
    pub sup_error: f64,
}

pub const SUP_GRID: usize = 2001;

/// L2 error (quadrature in `x`) and sup error on a uniform grid for each `n`.
pub fn convergence_study(
    target: &Target,
    map: MapSpec,
    ns: &[usize],
    rule: &QuadratureRule,
) -> Result<Vec<StudyRow>> {
    ns.iter()
        .map(|&n| {
            let itp = interpolate_mapped(target, map, n)?;
            // inverse-map failures surface as a non-finite integrand
            let l2 = l2_error(|x| target.eval(x), |x| eval_interpolant(&itp, x).unwrap_or(f64::NAN), rule)?;
            let mut sup = 0.0f64;
            for i in 0..SUP_GRID {
                let x = -1.0 + 2.0 * i as f64 / (SUP_GRID - 1) as f64;
                sup = sup.max((target.eval(x) - eval_interpolant(&itp, x)?).abs());
            }
            Ok(StudyRow { n, l2_error: l2, sup_error: sup })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleReport {
    pub a: f64,
    /// All six solutions of `1 + a x(z)² = 0`.
    pub roots: Vec<Complex64>,
    /// Residuals `|1 + a x(z)²|` per root.
    pub residuals: Vec<f64>,
    pub in_runge_region: Vec<bool>,
    /// The purely imaginary root `z = b i` of `z(z² + 1) = 2i/√a`, with `b`
    /// the real root of `b³ - b = -2/√a`.
    pub principal: Complex64,
}

/// Roots of `z³ + z - c`: complex Cardano with all three cube roots, then
/// Newton polishing.
fn cubic_roots(c: Complex64) -> [Complex64; 3] {
    // depressed cubic t³ + p t + q with p = 1, q = -c
    let q = -c;
    let disc = (q * 0.5).powi(2) + Complex64::new(1.0 / 27.0, 0.0);
    let mut u = (-q * 0.5 + disc.sqrt()).powf(1.0 / 3.0);
    if u.norm() < 1e-300 {
        u = (-q * 0.5 - disc.sqrt()).powf(1.0 / 3.0);
    }
    let omega = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    let mut uk = u;
    for root in out.iter_mut() {
        let mut z = uk - 1.0 / (3.0 * uk);
        for _ in 0..8 {
            let f = z * z * z + z - c;
            let df = 3.0 * z * z + 1.0;
            z -= f / df;
        }
        *root = z;
        uk *= omega;
    }
    out
}

/// Poles of `f(x(z))` for the Runge target `1 / (1 + a x²)` under the cubic
/// map.
pub fn cubic_map_poles(a: f64) -> Result<PoleReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::DomainError(format!("a = {a} must be positive")));
    }
    let c = Complex64::new(0.0, 2.0 / a.sqrt());
    let mut roots = Vec::with_capacity(6);
    roots.extend(cubic_roots(c));
    roots.extend(cubic_roots(-c));
    let residual = |z: Complex64| {
        let x = 0.5 * (z + z * z * z);
        (1.0 + a * x * x).norm()
    };
    let residuals: Vec<f64> = roots.iter().map(|&z| residual(z)).collect();
    let in_region = roots.iter().map(|&z| in_runge_region(z)).collect();
    let principal = *roots[..3]
        .iter()
        .min_by(|p, q| p.re.abs().total_cmp(&q.re.abs()))
        .expect("three roots");
    let principal = Complex64::new(0.0, principal.im);
    Ok(PoleReport { a, roots, residuals, in_runge_region: in_region, principal })
}
