use std::fmt;

use thiserror::Error;

/// Why a solution stops being real (or finite) at some point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryReason {
    /// A square-root argument reached zero or went negative.
    SqrtArgumentZero,
    /// The radicand under the Chiellini damping vanished (g blows up).
    DampingDenominatorZero,
    /// The solution value itself reached zero.
    SolutionZero,
    /// The caller-supplied span ended before any other boundary.
    UserSpan,
}

impl fmt::Display for BoundaryReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundaryReason::SqrtArgumentZero => "sqrt-argument-zero",
            BoundaryReason::DampingDenominatorZero => "damping-denominator-zero",
            BoundaryReason::SolutionZero => "solution-zero",
            BoundaryReason::UserSpan => "user-span",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("curvature index must be -1, 0 or +1, got {0}")]
    InvalidCurvature(i64),
    #[error("gamma = {gamma} gives gamma_bar = 0, which is excluded")]
    GammaBarZero { gamma: f64 },
    #[error("EP nonlinearity k must be <= 0, got {k}")]
    KPositive { k: f64 },
    #[error("closed damped family needs 16 k gamma_bar^2 + c1^2 > 0, got {delta}")]
    DeltaPlusNonPositive { delta: f64 },
    #[error("open damped family needs 16 k gamma_bar^2 - c1^2 < 0, got {delta}")]
    DeltaMinusNonNegative { delta: f64 },
    #[error("c1 must be nonzero")]
    C1Zero,
    #[error("c1 must be positive for this quantity, got {c1}")]
    C1NonPositive { c1: f64 },
    #[error("not real at {at}: {reason}")]
    Domain { reason: BoundaryReason, at: f64 },
    #[error("Wronskian is zero")]
    WronskianZero,
    #[error("damping has no real domain on the sampled points")]
    EmptyDomain,
    #[error("empty evaluation grid")]
    EmptyGrid,
    #[error("target {target} outside the reachable range (limit {limit})")]
    TargetOutOfRange { target: f64, limit: f64 },
    #[error("could not bracket the root")]
    NoBracket,
    #[error("quadrature did not converge: estimated error {estimate:e} above tolerance {tol:e}")]
    QuadratureFailed { estimate: f64, tol: f64 },
    #[error("step size underflow at eta = {eta} (h = {h:e})")]
    StepSizeUnderflow { eta: f64, h: f64 },
    #[error("non-finite state at eta = {eta}")]
    NonFiniteState { eta: f64 },
    #[error("first derivative of the scale factor is zero")]
    DerivativeZero,
    #[error("scale factor is zero")]
    ScaleFactorZero,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(reason: BoundaryReason, at: f64) -> Self {
        Error::Domain { reason, at }
    }

    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
