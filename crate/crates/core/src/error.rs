use thiserror::Error;

/// Errors raised by distance evaluation, volume diagnostics and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("distance {distance} is outside the scale of the oscillatory map (limit {limit})")]
    OutOfScale { distance: f64, limit: f64 },

    #[error("invalid radius {t}: {reason}")]
    InvalidRadius { t: f64, reason: &'static str },

    #[error("unsupported distance family for {0}")]
    UnsupportedFamily(&'static str),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("degenerate denominator: reference ball volume is zero")]
    DegenerateDenominator,

    #[error("only {accepted} accepted ball samples at t = {t} (need at least {required})")]
    InsufficientAcceptance { accepted: usize, required: usize, t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integration box covers only {coverage} of the probability mass")]
    InsufficientCoverage { coverage: f64 },

    #[error("degenerate ladder: discrepancy vanishes at rung {0}")]
    DegenerateLadder(usize),
}

impl Error {
    /// True for failures of an estimator rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::InsufficientAcceptance { .. }
                | Error::InsufficientCoverage { .. }
                | Error::DegenerateLadder(_)
                | Error::DegenerateDenominator
        )
    }
}

pub type Result<T> = core::result::Result<T, Error>;
