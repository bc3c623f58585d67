//! A classical force `F(t)` acting on the oscillator.
//!
//! The force enters the Fourier solution only as a phase, so it shifts the
//! mean by the convolution `∫_0^t F(s) U(t−s) (0, 1)ᵀ ds` and leaves every
//! other cumulant untouched.

use std::f64::consts::PI;

use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, partition, QuadSettings};
use crate::spectrum::{Damping, OscillatorSpec};
use crate::wigner::{evolve_cumulants, propagator, FourierWignerState, ThermalCovariance};

/// Relative tolerance used by [`evolve_forced`].
pub const DEFAULT_FORCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum ForceProfile {
    Constant {
        amplitude: f64,
    },
    /// `amplitude · cos(frequency · t + phase)`
    Sinusoidal {
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// Linear interpolation between samples, held constant outside them.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl ForceProfile {
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.is_empty() {
            return Err(Error::InvalidParameter(
                "force table needs matching, non-empty columns".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "force table times must be strictly increasing".into(),
            ));
        }
        if times.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "force table contains non-finite entries".into(),
            ));
        }
        Ok(ForceProfile::Tabulated { times, values })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            ForceProfile::Constant { amplitude } => *amplitude,
            ForceProfile::Sinusoidal {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * t + phase).cos(),
            ForceProfile::Tabulated { times, values } => {
                let i = times.partition_point(|&x| x <= t);
                if i == 0 {
                    values[0]
                } else if i == times.len() {
                    values[i - 1]
                } else {
                    let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                    values[i - 1] + w * (values[i] - values[i - 1])
                }
            }
        }
    }

    /// Points where the profile has a kink.
    fn kinks(&self) -> &[f64] {
        match self {
            ForceProfile::Tabulated { times, .. } => times,
            _ => &[],
        }
    }

    fn frequency(&self) -> f64 {
        match self {
            ForceProfile::Sinusoidal { frequency, .. } => frequency.abs(),
            _ => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForceProfile::Constant { amplitude } | ForceProfile::Sinusoidal { amplitude, .. } => *amplitude == 0.0,
            ForceProfile::Tabulated { values, .. } => values.iter().all(|&v| v == 0.0),
        }
    }
}

/// Mean displacement `(Δx, Δp)` produced by the force up to time `t`.
pub fn forced_mean_shift(profile: &ForceProfile, t: f64, osc: &OscillatorSpec, tol: f64) -> Result<Vector2<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::DomainError(t, "forced response time"));
    }
    if t == 0.0 || profile.is_zero() {
        return Ok(Vector2::zeros());
    }
    let natural = match osc.damping() {
        Damping::Underdamped { omega_tilde } => omega_tilde,
        Damping::Overdamped { .. } => 0.0,
    };
    let fastest = natural.max(profile.frequency()).max(osc.gamma0()).max(1.0);
    let points = partition(0.0, t, profile.kinks(), PI / (4.0 * fastest));
    let settings = QuadSettings {
        rel_tol: tol,
        abs_tol: 1e-300,
        ..QuadSettings::default()
    };
    let q = integrate_vec(
        |s| {
            let f = profile.value(s);
            let u = propagator(t - s, osc);
            [f * u[(0, 1)], f * u[(1, 1)]]
        },
        &points,
        &settings,
    )?;
    Ok(Vector2::new(q.value[0], q.value[1]))
}

/// Unforced evolution plus the forced shift of the mean.
pub fn evolve_forced(
    state0: &FourierWignerState,
    t: f64,
    profile: &ForceProfile,
    osc: &OscillatorSpec,
    sigma_t: &ThermalCovariance,
) -> Result<FourierWignerState> {
    let mut state = evolve_cumulants(state0, t, osc, sigma_t)?;
    state.mean += forced_mean_shift(profile, t, osc, DEFAULT_FORCE_TOL)?;
    Ok(state)
}
