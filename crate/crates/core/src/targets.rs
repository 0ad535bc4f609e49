//! Target functions on `[-1, 1]`.
//!
//! Targets parse from short strings such as `runge:a=25`, `tanh:alpha=3`,
//! `bessel:n=40,c=30,s=1`, `abs`, `sign` or `poly:1;0;-2` (ascending
//! coefficients), and print back in the same form.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bessel::{self, bessel_j};
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    /// `1 / (1 + a x²)`
    Runge { a: f64 },
    /// `tanh(α x)`
    Tanh { alpha: f64 },
    /// `J_n(c (x + s))`
    Bessel { n: u32, scale: f64, shift: f64 },
    Abs,
    /// Sign with `sign(0) = 0`.
    Sign,
    /// An explicit polynomial target.
    Poly { coeffs: Polynomial },
}

impl Target {
    pub fn runge(a: f64) -> Self {
        Target::Runge { a }
    }

    pub fn tanh(alpha: f64) -> Self {
        Target::Tanh { alpha }
    }

    pub fn bessel(n: u32, scale: f64, shift: f64) -> Self {
        Target::Bessel { n, scale, shift }
    }

    pub fn poly(coeffs: Vec<f64>) -> Self {
        Target::Poly { coeffs: Polynomial::new(coeffs) }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Target::Runge { a } => 1.0 / (1.0 + a * x * x),
            Target::Tanh { alpha } => (alpha * x).tanh(),
            Target::Bessel { n, scale, shift } => bessel_j(*n, scale * (x + shift)),
            Target::Abs => x.abs(),
            Target::Sign => {
                if x > 0.0 {
                    1.0
                } else if x < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Target::Poly { coeffs } => coeffs.eval(x),
        }
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::TargetParse { input: self.to_string(), reason: reason.into() });
        match self {
            Target::Runge { a } if !(*a > 0.0 && a.is_finite()) => bad("a must be positive"),
            Target::Tanh { alpha } if !alpha.is_finite() => bad("alpha must be finite"),
            Target::Bessel { n, scale, shift } => {
                if *n > bessel::MAX_ORDER {
                    return bad("order above 64");
                }
                let reach = scale.abs() * (shift.abs() + 1.0);
                if !(reach <= bessel::MAX_ARG) {
                    return bad("argument range exceeds 200");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Runge { a } => write!(f, "runge:a={a}"),
            Target::Tanh { alpha } => write!(f, "tanh:alpha={alpha}"),
            Target::Bessel { n, scale, shift } => write!(f, "bessel:n={n},c={scale},s={shift}"),
            Target::Abs => write!(f, "abs"),
            Target::Sign => write!(f, "sign"),
            Target::Poly { coeffs } => {
                let parts: Vec<String> = coeffs.coeffs().iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(";"))
            }
        }
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let fail = |reason: String| Error::TargetParse { input: input.to_string(), reason };
        let (kind, rest) = match input.split_once(':') {
            Some((k, r)) => (k.trim(), r.trim()),
            None => (input.trim(), ""),
        };

        if kind == "poly" {
            let coeffs = rest
                .split(';')
                .map(|s| s.trim().parse::<f64>().map_err(|e| fail(format!("coefficient `{s}`: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            return Ok(Target::poly(coeffs));
        }

        let mut params = Vec::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| fail(format!("expected key=value, got `{item}`")))?;
            let value: f64 = value.trim().parse().map_err(|e| fail(format!("value for `{key}`: {e}")))?;
            params.push((key.trim().to_string(), value));
        }
        let take = |name: &str, default: Option<f64>| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| fail(format!("missing parameter `{name}`")))
        };
        let allowed: &[&str] = match kind {
            "runge" => &["a"],
            "tanh" => &["alpha"],
            "bessel" => &["n", "c", "s"],
            "abs" | "sign" => &[],
            other => return Err(fail(format!("unknown target kind `{other}`"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(fail(format!("unknown parameter `{k}`")));
        }

        let target = match kind {
            "runge" => Target::runge(take("a", Some(25.0))?),
            "tanh" => Target::tanh(take("alpha", None)?),
            "bessel" => {
                let n = take("n", None)?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(fail("order must be a non-negative integer".into()));
                }
                Target::bessel(n as u32, take("c", Some(1.0))?, take("s", Some(0.0))?)
            }
            "abs" => Target::Abs,
            _ => Target::Sign,
        };
        target.validate()?;
        Ok(target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert_eq!(Target::runge(25.0).eval(0.0), 1.0);
        assert_eq!(Target::tanh(3.0).eval(0.0), 0.0);
        assert_eq!(Target::bessel(0, 10.0, 0.0).eval(0.0), 1.0);
        assert_eq!(Target::Sign.eval(0.0), 0.0);
        assert_eq!(Target::Sign.eval(-0.2), -1.0);
        assert_eq!(Target::Abs.eval(-0.2), 0.2);
        assert_eq!(Target::poly(vec![1.0, 0.0, -2.0]).eval(1.0), -1.0);
    }

    #[test]
    fn symmetry() {
        let even = [Target::runge(25.0), Target::bessel(0, 10.0, 0.0), Target::bessel(2, 10.0, 0.0)];
        let odd = [Target::tanh(3.0), Target::bessel(1, 20.0, 0.0), Target::bessel(3, 7.0, 0.0)];
        for i in 0..=200 {
            let x = -1.0 + i as f64 * 0.01;
            for t in &even {
                assert!((t.eval(x) - t.eval(-x)).abs() <= 1e-13, "{t} at {x}");
            }
            for t in &odd {
                assert!((t.eval(x) + t.eval(-x)).abs() <= 1e-13, "{t} at {x}");
            }
        }
    }

    #[test]
    fn parse_and_print() {
        let cases = [
            ("runge:a=25", Target::runge(25.0)),
            ("tanh:alpha=3", Target::tanh(3.0)),
            ("bessel:n=40,c=30,s=1", Target::bessel(40, 30.0, 1.0)),
            ("bessel:n=2,c=10", Target::bessel(2, 10.0, 0.0)),
            ("abs", Target::Abs),
            ("sign", Target::Sign),
            ("poly:0;1", Target::poly(vec![0.0, 1.0])),
        ];
        for (s, expected) in cases {
            let t: Target = s.parse().unwrap();
            assert_eq!(t, expected, "{s}");
            assert_eq!(t.to_string().parse::<Target>().unwrap(), t);
        }
    }

    #[test]
    fn parse_errors() {
        for s in ["cosh:a=1", "runge:a=-1", "bessel:c=3", "bessel:n=1.5", "bessel:n=90", "tanh:beta=2", "runge:a"] {
            assert!(s.parse::<Target>().is_err(), "{s} should not parse");
        }
    }

    #[test]
    fn json_is_tagged() {
        let s = serde_json::to_string(&Target::bessel(1, 20.0, 1.0)).unwrap();
        assert_eq!(s, r#"{"kind":"bessel","n":1,"scale":20.0,"shift":1.0}"#);
    }
}
