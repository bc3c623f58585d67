use num_complex::Complex64;
use thiserror::Error;

/// Failures raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {0} sits on a pole")]
    PoleArgument(Complex64),

    #[error("argument {0} lies on the branch cut along the negative real axis")]
    BranchCut(Complex64),

    #[error("argument is zero")]
    ZeroArgument,

    #[error("{0} is outside the domain of {1}")]
    DomainError(f64, &'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("critical damping (gamma0 = omega_r = {0}) is not supported")]
    CriticalDamping(f64),

    #[error("power-law term with exponent {0} is excluded from the spectral model")]
    ExcludedSpectrum(i32),

    #[error("quadrature stopped at estimate {estimate:e} with error bound {error_bound:e}")]
    ToleranceNotMet { estimate: f64, error_bound: f64 },

    #[error("series did not converge after {terms} terms (last term {last_term:e})")]
    SeriesNotConverged { terms: usize, last_term: f64 },

    #[error("{0} is not available in this damping regime")]
    UnsupportedRegime(&'static str),

    #[error("state is not physical: determinant {0:e}")]
    NonPhysicalState(f64),

    #[error("integrator step fell below the floor at t = {t} (h = {step:e})")]
    StiffnessFailure { t: f64, step: f64 },

    #[error("transition matrix is singular at t = {t} (det = {det:e})")]
    SingularTransition { t: f64, det: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
