use thiserror::Error;

/// Errors raised by the model, eigenvalue, matching and auxiliary-function routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the region where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive integrator could not meet its tolerance.
    #[error("integration failure at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    /// The horizon was reached without finding a zero of w' and without a
    /// certificate that none exists.
    #[error("horizon {horizon} reached without locating a zero of w' or certifying d = inf")]
    HorizonReached { horizon: f64 },

    /// No sign change of the shooting criterion inside the search bracket.
    #[error("eigenvalue bracket failure on [{lo}, {hi}]")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("mesh too coarse: {points} points (need at least {min})")]
    MeshTooCoarse { points: usize, min: usize },

    /// The model weight vanishes or is undefined at a sample point.
    #[error("weight is singular at t = {t}")]
    SingularWeight { t: f64 },

    /// The perturbation parameter δ is too large for the requested dimension.
    #[error("infeasible delta {delta} for n = {n}")]
    InfeasibleDelta { n: f64, delta: f64 },

    /// The first zero of w' does not exist (certified d = inf).
    #[error("d = inf: w' has no positive zero (certified)")]
    CertifiedInfinite,

    /// The requested maximum is below the smallest maximum attainable by the family.
    #[error("target maximum {u_star} is below the family minimum {m_min}")]
    TargetBelowMinimum { u_star: f64, m_min: f64 },

    #[error("principal eigenfunction is not sign-definite (min = {min})")]
    NonPositiveEigenfunction { min: f64 },

    #[error("failed to converge: {0}")]
    NoConvergence(String),
}

impl Error {
    /// Whether the error reflects bad input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::MeshTooCoarse { .. }
                | Error::InfeasibleDelta { .. }
                | Error::TargetBelowMinimum { .. }
        )
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
