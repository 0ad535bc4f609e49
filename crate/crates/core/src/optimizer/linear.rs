//! Single-layer (linear) least-squares baseline.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::quadrature::{l2_error, QuadratureRule};
use crate::targets::Target;

/// Best degree-`degree` polynomial in the quadrature-weighted L2 sense, via QR
/// of the weighted Vandermonde matrix. Returns the polynomial and its L2 error.
pub fn fit_linear_ls(degree: usize, target: &Target, rule: &QuadratureRule) -> Result<(Polynomial, f64)> {
    let m = rule.order();
    let n = degree + 1;
    if n > m {
        return Err(Error::RankDeficient { column: m });
    }
    let mut a = DMatrix::zeros(m, n);
    let mut b = DVector::zeros(m);
    for (i, (&x, &w)) in rule.nodes().iter().zip(rule.weights()).enumerate() {
        let sw = w.sqrt();
        let mut pow = sw;
        for j in 0..n {
            a[(i, j)] = pow;
            pow *= x;
        }
        b[i] = sw * target.eval(x);
    }
    let qr = a.qr();
    let r = qr.r();
    let scale = (0..n).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if let Some(column) = (0..n).find(|&j| r[(j, j)].abs() <= 1e-14 * scale) {
        return Err(Error::RankDeficient { column });
    }
    let qtb = qr.q().transpose() * b;
    let c = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficient { column: n - 1 })?;
    let poly = Polynomial::new(c.as_slice().to_vec());
    let err = l2_error(|x| target.eval(x), |x| poly.eval(x), rule)?;
    Ok((poly, err))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, DEFAULT_ORDER};

    #[test]
    fn polynomial_target_is_reproduced() {
        let rule = gauss_legendre(DEFAULT_ORDER).unwrap();
        let target = Target::poly(vec![0.5, -1.0, 0.0, 2.0]);
        let (p, err) = fit_linear_ls(5, &target, &rule).unwrap();
        assert!(err <= 1e-12);
        assert!((p.coeffs()[3] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn too_many_coefficients_for_the_rule() {
        let rule = gauss_legendre(4).unwrap();
        assert!(matches!(fit_linear_ls(4, &Target::Abs, &rule), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn runge_degree_seven() {
        let rule = gauss_legendre(DEFAULT_ORDER).unwrap();
        let (_, err) = fit_linear_ls(7, &Target::runge(25.0), &rule).unwrap();
        assert!((err - 1.24e-1).abs() <= 0.05 * 1.24e-1, "{err}");
    }
}
