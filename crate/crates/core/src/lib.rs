//! Numerical engine for a quantum Brownian oscillator coupled to a linear bath.
//!
//! The crate computes the time-dependent diffusion coefficients of the exact
//! master equation for ohmic, supraohmic and Laurent spectra at any
//! temperature, and evolves Wigner-function cumulants through the exact
//! characteristic-function solution, including external forces and
//! time-dependent drift.
//!
//! Units are natural: `ħ = k_B = 1`, so the uncertainty bound on a Gaussian
//! covariance reads `det σ ≥ 1/4`.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod force;
pub mod parametric;
pub mod quadrature;
pub mod special;
pub mod spectrum;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use spectrum::{BathSpec, Damping, OscillatorSpec, RegimeWarning};
