//! Deep (composite) polynomial approximation on `[-1, 1]`.

pub mod bessel;
pub mod conformal;
pub mod deflation;
pub mod error;
pub mod landscape;
pub mod newton_compose;
pub mod objective;
pub mod optimizer;
pub mod polynomial;
pub mod quadrature;
mod serde_util;
pub mod targets;

pub use error::{Error, Result};
pub use objective::{FitProblem, Objective, ParameterVector, ProblemSpec, Signature};
pub use optimizer::{fit_deep, fit_linear_ls, FitResult, Flag, OptimizerConfig, TrialRecord};
pub use polynomial::{normalize_chain, normalize_pair, DeepPolynomial, Polynomial};
pub use quadrature::{gauss_legendre, QuadratureRule};
pub use targets::Target;
