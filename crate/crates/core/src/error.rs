use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expanded degree {degree} exceeds the cap of {cap}")]
    DegreeCapExceeded { degree: usize, cap: usize },

    #[error("layer {layer} has a zero leading coefficient")]
    SingularLeadingCoefficient { layer: usize },

    #[error("quadrature order {0} is outside 1..=1000")]
    InvalidOrder(usize),

    #[error("integrand is not finite at node {node} (x = {x})")]
    NonFiniteIntegrand { node: usize, x: f64 },

    #[error("parameter vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid layer signature: {0}")]
    InvalidSignature(String),

    #[error("least-squares matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    #[error("argument outside the domain: {0}")]
    DomainError(String),

    #[error("point coincides with known root {index}")]
    AtKnownRoot { index: usize },

    #[error("cannot parse target `{input}`: {reason}")]
    TargetParse { input: String, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("interpolation nodes are not distinct")]
    DuplicateNodes,

    #[error("inverse map did not converge for x = {0}")]
    InverseMapFailure(f64),
}
