//! Fixtures shared by the benchmarks.

use deeppoly::{gauss_legendre, FitProblem, Signature, Target};

/// Runge `a = 25` with the given layer counts on the default 100-node rule.
pub fn runge_problem(counts: &[usize]) -> FitProblem {
    let sig = Signature::new(counts.to_vec()).expect("valid signature");
    FitProblem::new(Target::runge(25.0), sig, gauss_legendre(100).expect("valid order")).expect("valid problem")
}
