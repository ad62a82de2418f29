//! Error type shared across the crate.

use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures surfaced by the numerical layers.
///
/// Diagnostic payloads carry enough context to name the offending node or
/// witness value in reports.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(&'static str),
    /// Index pair outside the supported evaluation envelope.
    OutsideEnvelope { mu: f64, nu: f64 },
    /// A grid node sits on a pole of the parametrisation.
    PoleNode { theta: f64 },
    /// Astigmatism does not vanish fast enough at a pole for quadrature
    /// reconstruction.
    NonIntegrablePole,
    /// A constructed profile fails strict convexity.
    ConvexityViolation {
        index: usize,
        theta: f64,
        r1: f64,
        r2: f64,
    },
    /// A pole limit did not settle within the extrapolation budget.
    ExtrapolationFailed(&'static str),
    /// Quadrature refinement did not converge to the requested tolerance.
    QuadratureNonConvergent(&'static str),
    /// The umbilic at the requested pole is not isolated.
    NonIsolatedUmbilic,
    /// A self-adjointness hypothesis failed; names the condition.
    DomainCheckFailed(&'static str),
    /// Mismatched parameters between coupled inputs.
    ParameterMismatch(&'static str),
    /// Linear solver hit a vanishing pivot.
    SolverBreakdown { step: usize },
    /// Time stepping exceeded the analytic growth bound.
    Instability { step: usize, norm: f64, bound: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(what) => write!(f, "invalid argument: {what}"),
            Error::OutsideEnvelope { mu, nu } => {
                write!(f, "Legendre index (mu={mu}, nu={nu}) outside supported envelope")
            }
            Error::PoleNode { theta } => {
                write!(f, "grid node theta={theta} coincides with a pole")
            }
            Error::NonIntegrablePole => {
                write!(f, "astigmatism has non-integrable pole behaviour")
            }
            Error::ConvexityViolation { index, theta, r1, r2 } => write!(
                f,
                "convexity violated at node {index} (theta={theta}): r1={r1}, r2={r2}"
            ),
            Error::ExtrapolationFailed(what) => write!(f, "pole extrapolation failed: {what}"),
            Error::QuadratureNonConvergent(what) => {
                write!(f, "quadrature did not converge: {what}")
            }
            Error::NonIsolatedUmbilic => write!(f, "umbilic point is not isolated"),
            Error::DomainCheckFailed(cond) => {
                write!(f, "self-adjoint domain condition failed: {cond}")
            }
            Error::ParameterMismatch(what) => write!(f, "parameter mismatch: {what}"),
            Error::SolverBreakdown { step } => {
                write!(f, "linear solver breakdown at step {step}")
            }
            Error::Instability { step, norm, bound } => write!(
                f,
                "time stepping unstable at step {step}: norm {norm} exceeds bound {bound}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
