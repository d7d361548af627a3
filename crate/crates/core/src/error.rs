use thiserror::Error;

/// Every failure the engine can report.
///
/// Variants split into two families: *falsifications* (a checked congruence or
/// identity did not hold) and *operational* errors (bad input, precision ran out).
/// Campaign drivers use [`Error::is_falsification`] to choose the exit status.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("no simple Newton segment with slope {0}")]
    NoSimpleSegment(String),
    #[error("generator sets or primes do not match: {0}")]
    GeneratorMismatch(String),
    #[error("value is not p-integral: {0}")]
    NotIntegral(String),
    #[error("nilpotent masks do not commute: {0}")]
    NonCommuting(String),
    #[error("oracle disagrees with ground truth: {0}")]
    OracleMismatch(String),
    #[error("no admissible gap c found: {0}")]
    NoGap(String),
    #[error("no separating generator for a non-congruent character: {0}")]
    WitnessNotFound(String),
    #[error("congruence failed: {0}")]
    CongruenceFailed(String),
    #[error("trace hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("trace route and direct route disagree: {0}")]
    RouteMismatch(String),
    #[error("no congruent eigencharacter: {0}")]
    NoCongruentCharacter(String),
    #[error("zero eigenvalue in a slope set")]
    ZeroEigenvalue,
    #[error("approximate idempotent property failed: {0}")]
    PropertyFailed(String),
    #[error("local constancy failed: {0}")]
    ConstancyFailed(String),
    #[error("matrix is not a symplectic similitude")]
    NotSymplectic,
    #[error("torus element is not in the positive semigroup")]
    NotPlus,
    #[error("double coset identity failed: {0}")]
    IdentityFailed(String),
    #[error("torus point is not regular")]
    NotRegular,
    #[error("difference is not a non-negative combination of simple roots: {0}")]
    NotExpressible(String),
    #[error("valuation profile mismatch: {0}")]
    ValuationMismatch(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

impl Error {
    /// True when the error records a mathematical claim that did not hold.
    pub fn is_falsification(&self) -> bool {
        matches!(
            self,
            Error::OracleMismatch(_)
                | Error::CongruenceFailed(_)
                | Error::RouteMismatch(_)
                | Error::HypothesisFailed(_)
                | Error::PropertyFailed(_)
                | Error::ConstancyFailed(_)
                | Error::IdentityFailed(_)
                | Error::ValuationMismatch(_)
                | Error::NoGap(_)
                | Error::WitnessNotFound(_)
                | Error::NoCongruentCharacter(_)
        )
    }

    /// Short machine-readable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InsufficientPrecision(_) => "InsufficientPrecision",
            Error::NoSimpleSegment(_) => "NoSimpleSegment",
            Error::GeneratorMismatch(_) => "GeneratorMismatch",
            Error::NotIntegral(_) => "NotIntegral",
            Error::NonCommuting(_) => "NonCommuting",
            Error::OracleMismatch(_) => "OracleMismatch",
            Error::NoGap(_) => "NoGap",
            Error::WitnessNotFound(_) => "WitnessNotFound",
            Error::CongruenceFailed(_) => "CongruenceFailed",
            Error::HypothesisFailed(_) => "HypothesisFailed",
            Error::RouteMismatch(_) => "RouteMismatch",
            Error::NoCongruentCharacter(_) => "NoCongruentCharacter",
            Error::ZeroEigenvalue => "ZeroEigenvalue",
            Error::PropertyFailed(_) => "PropertyFailed",
            Error::ConstancyFailed(_) => "ConstancyFailed",
            Error::NotSymplectic => "NotSymplectic",
            Error::NotPlus => "NotPlus",
            Error::IdentityFailed(_) => "IdentityFailed",
            Error::NotRegular => "NotRegular",
            Error::NotExpressible(_) => "NotExpressible",
            Error::ValuationMismatch(_) => "ValuationMismatch",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::InvalidInput(_) => "InvalidInput",
            Error::ConfigInvalid(_) => "ConfigInvalid",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
