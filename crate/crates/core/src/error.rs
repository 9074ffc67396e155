use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("non-finite value while evaluating {0}")]
    Evaluation(String),
    #[error("tolerance not met (best estimate {estimate}, error estimate {error})")]
    ToleranceNotMet { estimate: f64, error: f64 },
    #[error("no sign change on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },
    #[error("leading coefficient vanishes")]
    Degree,
    #[error("matrix is singular (|det| = {0:e})")]
    Singular(f64),
    #[error("point outside the domain: {0}")]
    Domain(String),
    #[error("chart not valid here: {0}")]
    Chart(String),
    #[error("metric is not positive definite (eigenvalue {eigenvalue:e})")]
    NotPositive { eigenvalue: f64 },
    #[error("profile denominator vanishes at y = {root} inside the working interval")]
    DenominatorRoot { root: f64 },
    #[error("point on the boundary of the moment domain: {0}")]
    Boundary(String),
    #[error("function is not convex here: {0}")]
    NotConvex(String),
    #[error("induced metric degenerates at node {node} (log argument {value:e})")]
    Degenerate { node: usize, value: f64 },
    #[error("step {ds:e} exceeds the explicit stability bound {bound:e}")]
    Unstable { ds: f64, bound: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
