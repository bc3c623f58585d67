//! The frequency integrals `FI_N`, `FC_N(t)`, `FS_N(t)` over the ohmic band.
//!
//! `FC_N(t) = ∫_0^Λ ω^N cos(ωt) coth(ω/2T) / [(ω²−Ω_r²)² + 4γ0²ω²] dω`, with
//! `FS_N` the sine counterpart and `FI_N = FC_N(0)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::ExpansionControl;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, partition, QuadSettings};
use crate::special::{band_edge_harmonic, harmonic_number};
use crate::spectrum::{BathSpec, Damping, OscillatorSpec};

/// Trigonometric weight of a frequency integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kernel {
    Cos,
    Sin,
}

/// `(ω² − Ω_r²)² + 4γ0²ω²`
pub(crate) fn resonance_denominator(osc: &OscillatorSpec, omega: f64) -> f64 {
    let w2 = osc.omega_r() * osc.omega_r();
    let g = osc.gamma0();
    let d = omega * omega - w2;
    d * d + 4.0 * g * g * omega * omega
}

/// `ω coth(ω/2T)`, with its limit `2T` at the origin and `ω` at `T = 0`.
pub(crate) fn omega_coth(omega: f64, temperature: f64, floor: f64) -> f64 {
    if temperature == 0.0 {
        return omega;
    }
    if omega < floor {
        return 2.0 * temperature;
    }
    omega / (omega / (2.0 * temperature)).tanh()
}

pub(crate) fn quad_settings(ctrl: &ExpansionControl) -> QuadSettings {
    QuadSettings {
        rel_tol: ctrl.rel_tol,
        abs_tol: ctrl.abs_tol,
        ..QuadSettings::default()
    }
}

/// Panel width that keeps roughly eight panels per period of `ωt`.
pub(crate) fn oscillation_width(t: f64) -> f64 {
    if t > 0.0 {
        PI / (4.0 * t)
    } else {
        f64::INFINITY
    }
}

/// Ohmic-band frequency integral by adaptive quadrature, ignoring any
/// non-ohmic spectrum terms.
pub(crate) fn band_integral(
    n: u32,
    kernel: Kernel,
    t: f64,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    ctrl: &ExpansionControl,
) -> Result<f64> {
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidParameter(format!(
            "frequency integral order {n} not in 1..=4"
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::DomainError(t, "frequency integral time"));
    }
    let temp = bath.temperature;
    let floor = 1e-8 * temp.max(osc.omega_r());
    let splits = [osc.omega_r(), 2.0 * PI * temp];
    let points = partition(0.0, bath.cutoff_uv, &splits, oscillation_width(t));
    let power = (n - 1) as i32;
    let integrand = |w: f64| {
        let trig = match kernel {
            Kernel::Cos => (w * t).cos(),
            Kernel::Sin => (w * t).sin(),
        };
        w.powi(power) * omega_coth(w, temp, floor) * trig / resonance_denominator(osc, w)
    };
    Ok(integrate(integrand, &points, &quad_settings(ctrl))?.value[0])
}

fn require_ohmic(bath: &BathSpec) -> Result<()> {
    if bath.is_ohmic() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(
            "the quadrature oracle integrates the ohmic band only".into(),
        ))
    }
}

/// `FC_N(t)` by adaptive quadrature over `[0, Λ]`.
pub fn fc_n_oracle(n: u32, t: f64, osc: &OscillatorSpec, bath: &BathSpec, ctrl: &ExpansionControl) -> Result<f64> {
    require_ohmic(bath)?;
    bath.check(osc)?;
    band_integral(n, Kernel::Cos, t, osc, bath, ctrl)
}

/// `FS_N(t)` by adaptive quadrature over `[0, Λ]`.
pub fn fs_n_oracle(n: u32, t: f64, osc: &OscillatorSpec, bath: &BathSpec, ctrl: &ExpansionControl) -> Result<f64> {
    require_ohmic(bath)?;
    bath.check(osc)?;
    band_integral(n, Kernel::Sin, t, osc, bath, ctrl)
}

/// The two harmonic-number combinations shared by every late-time formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicBrackets {
    /// `Im H((γ0 + iΩ̃)/2πT) / Ω̃`, analytically continued when overdamped.
    pub im_over_freq: f64,
    /// `G(Λ/2πT) − Re H((γ0 + iΩ̃)/2πT)`, with `G` the hard-band
    /// counterpart of `H` (see [`band_edge_harmonic`]).
    pub re_cutoff: f64,
}

pub fn harmonic_brackets(osc: &OscillatorSpec, bath: &BathSpec) -> Result<HarmonicBrackets> {
    let g = osc.gamma0();
    let temp = bath.temperature;
    let log_ratio = (bath.cutoff_uv / osc.omega_r()).ln();
    match osc.damping() {
        Damping::Underdamped { omega_tilde } => {
            if temp == 0.0 {
                return Ok(HarmonicBrackets {
                    im_over_freq: omega_tilde.atan2(g) / omega_tilde,
                    re_cutoff: log_ratio,
                });
            }
            let nu = 2.0 * PI * temp;
            let h = harmonic_number(Complex64::new(g, omega_tilde) / nu)?;
            let h_cut = band_edge_harmonic(bath.cutoff_uv / nu)?;
            Ok(HarmonicBrackets {
                im_over_freq: h.im / omega_tilde,
                re_cutoff: h_cut - h.re,
            })
        }
        Damping::Overdamped { gamma_tilde } => {
            if temp == 0.0 {
                return Ok(HarmonicBrackets {
                    im_over_freq: ((g + gamma_tilde) / (g - gamma_tilde)).ln() / (2.0 * gamma_tilde),
                    re_cutoff: log_ratio,
                });
            }
            let nu = 2.0 * PI * temp;
            let h_plus = harmonic_number(Complex64::new((g + gamma_tilde) / nu, 0.0))?.re;
            let h_minus = harmonic_number(Complex64::new((g - gamma_tilde) / nu, 0.0))?.re;
            let h_cut = band_edge_harmonic(bath.cutoff_uv / nu)?;
            Ok(HarmonicBrackets {
                im_over_freq: (h_plus - h_minus) / (2.0 * gamma_tilde),
                re_cutoff: h_cut - 0.5 * (h_plus + h_minus),
            })
        }
    }
}

/// Closed form of `FI_1` for an infinitely wide band.
pub fn fi1_closed(osc: &OscillatorSpec, bath: &BathSpec) -> Result<f64> {
    osc.require_damping()?;
    let g = osc.gamma0();
    let b = harmonic_brackets(osc, bath)?;
    Ok(PI * bath.temperature / (2.0 * g * osc.omega_r().powi(2)) + b.im_over_freq / (2.0 * g))
}

/// Closed form of `FI_3`, logarithmic in the cutoff.
pub fn fi3_closed(osc: &OscillatorSpec, bath: &BathSpec) -> Result<f64> {
    osc.require_damping()?;
    let g = osc.gamma0();
    let b = harmonic_brackets(osc, bath)?;
    Ok(PI * bath.temperature / (2.0 * g)
        + (osc.shifted_frequency_sq() - g * g) * b.im_over_freq / (2.0 * g)
        + b.re_cutoff)
}
