use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("power s = {s} sits on a transition value of dimension {d} (within {tol:e})")]
    EndpointPower { d: u32, s: f64, tol: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dimension {0} is not supported by this operation")]
    UnsupportedDimension(u32),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("parameter value has no preimage: {0}")]
    NonInvertible(String),
    #[error("quadrature failed to reach tolerance: {0}")]
    QuadratureFailure(String),
    #[error("bad grid spec: {0}")]
    BadSpec(String),
    #[error("radial functions live on different grids")]
    GridMismatch,
    #[error("profile is not integrable: {0}")]
    NotIntegrable(String),
    #[error("family not supported for these parameters: {0}")]
    UnsupportedFamily(String),
    #[error("extension is the Friedrichs one; the boundary coefficient vanishes")]
    FriedrichsExtension,
    #[error("resolvent pole: the Krein denominator vanishes at lambda = {lambda}")]
    PoleAtLambda { lambda: f64 },
    #[error("tau = 0: the shifted operator has a zero mode and is not invertible")]
    NotInvertible,
    #[error("form domain violation: {0}")]
    FormDomainViolation(String),
    #[error("domain violation: {0}")]
    DomainViolation(String),
    #[error("no sign change located: {0}")]
    BracketFailure(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
