//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failure modes of geometry queries, kernel evaluation, bounds and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("the domain has no boundary")]
    NoBoundary,
    #[error("point ({x}, {y}) is not in the open domain")]
    PointOutside { x: f64, y: f64 },
    #[error("point ({x}, {y}) lies in the excluded disk")]
    PointInsideDisk { x: f64, y: f64 },
    #[error("the two points coincide")]
    CoincidentPoints,
    #[error("parameter order violated: {0}")]
    ParameterOrder(String),
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("target at distance {distance:e} from the boundary is inside the validity margin {margin:e}")]
    TargetTooCloseToBoundary { distance: f64, margin: f64 },
    #[error("linear solve failed: {0}")]
    SolverDivergence(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("the domain is unbounded")]
    UnboundedDomain,
    #[error("distance {distance} to the boundary exceeds {limit}")]
    TooFarFromBoundary { distance: f64, limit: f64 },
    #[error("parameters outside the regime of the bound: {0}")]
    InvalidRegime(String),
    #[error("trajectory does not match the scenario: {0}")]
    ScenarioMismatch(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("singular configuration: {0}")]
    Singularity(String),
    #[error("initial condition is zero")]
    ZeroInitialCondition,
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoBoundary => "NoBoundary",
            Error::PointOutside { .. } => "PointOutside",
            Error::PointInsideDisk { .. } => "PointInsideDisk",
            Error::CoincidentPoints => "CoincidentPoints",
            Error::ParameterOrder(_) => "ParameterOrder",
            Error::InvalidDomain(_) => "DomainError",
            Error::TargetTooCloseToBoundary { .. } => "TargetTooCloseToBoundary",
            Error::SolverDivergence(_) => "SolverDivergence",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::UnboundedDomain => "UnboundedDomain",
            Error::TooFarFromBoundary { .. } => "TooFarFromBoundary",
            Error::InvalidRegime(_) => "InvalidRegime",
            Error::ScenarioMismatch(_) => "ScenarioMismatch",
            Error::NoConvergence(_) => "NoConvergence",
            Error::Singularity(_) => "Singularity",
            Error::ZeroInitialCondition => "ZeroInitialCondition",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
