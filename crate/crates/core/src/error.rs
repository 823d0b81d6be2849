use thiserror::Error;

pub type Result<T> = std::result::Result<T, GmasError>;

#[derive(Debug, Error)]
pub enum GmasError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("vertex {0} is a source vertex but has no kinetic-order complex")]
    MissingKinetic(String),

    #[error("edge {0} -> {1} has no rate constant")]
    MissingRate(String, String),

    #[error("network is not weakly reversible: {0}")]
    NotWeaklyReversible(String),

    #[error("kinetic-order subspace undefined: vertex {0} is not a source vertex")]
    NonSourceVertex(String),

    #[error("state vector must be strictly positive (component {0} is {1})")]
    NonPositiveState(usize, f64),

    #[error("sign enumeration cap exceeded: ambient dimension {dim} > cap {cap}")]
    EnumerationCap { dim: usize, cap: usize },

    #[error("Jacobian is singular at the current iterate (sign condition likely violated)")]
    JacobianSingular,

    #[error("homotopy step size fell below the floor without reaching the target")]
    StepFloorReached,

    #[error("exponent saturation: |exponent| exceeded the clamp of {0}")]
    Saturation(f64),

    #[error("candidate point is not vertex-balanced (max relative imbalance {0:.3e})")]
    NotVertexBalanced(f64),

    #[error("trajectory approached the boundary of the positive orthant at t = {t}")]
    StateCollapse { t: f64 },

    #[error("iterate left the bounding box [1e-12, 1e12]^n at component {0}")]
    BoxExit(usize),

    #[error("{0}")]
    Invalid(String),
}
