//! Analytic representations of the time-dependent integral `FC_1(t)` for an
//! infinitely wide ohmic band, and their first three time derivatives.
//!
//! Every representation splits `FC_1 = pole part + ΔFC_1`. The pole part is a
//! damped oscillation `K Re[C e^{λt}]` with `λ = −γ0 + iΩ̃`; `ΔFC_1` is either a
//! bracket of exponential integrals, a thermal series, or both. All pieces are
//! sums of exponentials, so their derivatives are taken term by term and
//! returned as the `(FC_1, FS_2, FC_3, FS_4)` quadruple through
//! `FS_2 = −FC_1'`, `FC_3 = −FC_1''`, `FS_4 = FC_1'''`.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign};

use num_complex::Complex64;

use super::integrals::{oscillation_width, quad_settings};
use super::ExpansionControl;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, partition};
use crate::special::exp_integral_e1_scaled;
use crate::spectrum::{BathSpec, Damping, OscillatorSpec};

/// `(FC_1, FS_2, FC_3, FS_4)` at one time.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KernelSet {
    pub fc1: f64,
    pub fs2: f64,
    pub fc3: f64,
    pub fs4: f64,
}

impl KernelSet {
    /// Builds the set from `f, f', f'', f'''`.
    fn from_derivatives(d: [f64; 4]) -> Self {
        Self {
            fc1: d[0],
            fs2: -d[1],
            fc3: -d[2],
            fs4: d[3],
        }
    }

    fn max_abs(&self) -> f64 {
        self.fc1
            .abs()
            .max(self.fs2.abs())
            .max(self.fc3.abs())
            .max(self.fs4.abs())
    }
}

impl Add for KernelSet {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            fc1: self.fc1 + o.fc1,
            fs2: self.fs2 + o.fs2,
            fc3: self.fc3 + o.fc3,
            fs4: self.fs4 + o.fs4,
        }
    }
}

impl AddAssign for KernelSet {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

/// `(γ0, Ω̃)` for the underdamped branch; the expansions are written in terms
/// of the complex pole `γ0 ± iΩ̃` and are not continued to overdamping.
pub(crate) fn underdamped_params(osc: &OscillatorSpec) -> Result<(f64, f64)> {
    osc.require_damping()?;
    match osc.damping() {
        Damping::Underdamped { omega_tilde } => Ok((osc.gamma0(), omega_tilde)),
        Damping::Overdamped { .. } => Err(Error::UnsupportedRegime("series expansion of FC1 (overdamped)")),
    }
}

fn require_positive_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(t, "expansion time (needs t > 0)"))
    }
}

/// Thermal weight of the pole part: `(sinh(Ω̃/T) − i sin(γ0/T)) / (cosh(Ω̃/T) − cos(γ0/T))`,
/// evaluated through `e^{−Ω̃/T}` so that it tends smoothly to 1 as `T → 0`.
pub(crate) fn thermal_pole_weight(gamma: f64, omega_tilde: f64, temperature: f64) -> Complex64 {
    if temperature == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let e = (-omega_tilde / temperature).exp();
    let (sg, cg) = (gamma / temperature).sin_cos();
    let den = 1.0 + e * e - 2.0 * cg * e;
    Complex64::new((1.0 - e * e) / den, -2.0 * sg * e / den)
}

/// `(π/4γ0Ω̃) Re[C λⁿ e^{λt}]` for `n = 0..=3`.
pub(crate) fn pole_part(t: f64, gamma: f64, omega_tilde: f64, weight: Complex64) -> KernelSet {
    let lambda = Complex64::new(-gamma, omega_tilde);
    let k = PI / (4.0 * gamma * omega_tilde);
    let mut term = weight * (lambda * t).exp();
    let mut d = [0.0; 4];
    for slot in &mut d {
        *slot = k * term.re;
        term *= lambda;
    }
    KernelSet::from_derivatives(d)
}

/// Value and derivatives of `u(t) = E1(a t) e^{b t}`.
fn e1_term(a: Complex64, b: Complex64, t: f64) -> Result<[Complex64; 4]> {
    let c = b - a;
    let ect = (c * t).exp();
    let u = exp_integral_e1_scaled(a * t)? * ect;
    let r = ect / t;
    let r1 = ect * (c / t - 1.0 / (t * t));
    let r2 = ect * (c * c / t - 2.0 * c / (t * t) + 2.0 / (t * t * t));
    Ok([
        u,
        b * u - r,
        b * b * u - b * r - r1,
        b * b * b * u - b * b * r - b * r1 - r2,
    ])
}

/// `(1/4γ0Ω̃) Im[E1((x0−z)t) e^{−zt} + E1((x0+z)t) e^{zt}]` with `z = γ0 − iΩ̃`.
///
/// This is `−∫_{x0}^∞ x e^{−xt} / [(x²+Ω_r²)² − 4γ0²x²] dx`. With `x0 = 0` it is
/// the zero-temperature correction; with `x0 = 2πT` it replaces the thermal
/// series by its integral; larger `x0` closes a truncated series.
pub(crate) fn e1_bracket(t: f64, gamma: f64, omega_tilde: f64, x0: f64) -> Result<KernelSet> {
    let z = Complex64::new(gamma, -omega_tilde);
    let nu = Complex64::new(x0, 0.0);
    let u1 = e1_term(nu - z, -z, t)?;
    let u2 = e1_term(nu + z, z, t)?;
    let k = 1.0 / (4.0 * gamma * omega_tilde);
    let mut d = [0.0; 4];
    for i in 0..4 {
        d[i] = k * (u1[i] + u2[i]).im;
    }
    Ok(KernelSet::from_derivatives(d))
}

/// `(x² + Ω_r²)² − 4γ0²x²`, the resonance denominator on the imaginary axis.
fn imaginary_axis_denominator(osc: &OscillatorSpec, x: f64) -> f64 {
    let s = x * x + osc.omega_r() * osc.omega_r();
    s * s - 4.0 * osc.gamma0() * osc.gamma0() * x * x
}

/// Thermal series `−Σ_k ν²k e^{−νkt} / P(iνk)` with `ν = 2πT`.
fn thermal_series(t: f64, osc: &OscillatorSpec, temperature: f64, ctrl: &ExpansionControl) -> Result<KernelSet> {
    let (gamma, omega_tilde) = underdamped_params(osc)?;
    let nu = 2.0 * PI * temperature;
    let decay = (-nu * t).exp();
    let mut acc = KernelSet::default();
    let mut last = 0.0;
    for k in 1..=ctrl.k_max {
        let kf = k as f64;
        let x = nu * kf;
        let p = imaginary_axis_denominator(osc, x);
        let base = -nu * nu * kf * (-x * t).exp() / p;
        let rate = -x;
        let term = KernelSet::from_derivatives([base, base * rate, base * rate * rate, base * rate * rate * rate]);
        acc += term;
        last = term.max_abs();
        let p_next = imaginary_axis_denominator(osc, x + nu);
        let ratio = decay * ((kf + 1.0) / kf).powi(4) * (p / p_next).max(1.0);
        if ratio < 1.0 {
            let remainder = last * ratio / (1.0 - ratio);
            if remainder <= ctrl.rel_tol * acc.max_abs() + ctrl.abs_tol {
                return Ok(acc);
            }
        }
    }
    if !ctrl.close_tail {
        return Err(Error::SeriesNotConverged {
            terms: ctrl.k_max,
            last_term: last,
        });
    }
    // Euler-Maclaurin midpoint closure of the remaining terms.
    let tail = e1_bracket(t, gamma, omega_tilde, nu * (ctrl.k_max as f64 + 0.5))?;
    Ok(acc + tail)
}

/// `2∫_0^∞ ω^N trig(ωt) w(ω) / P(ω) dω` for the four kernels at once.
fn damped_band_integral<W>(
    t: f64,
    osc: &OscillatorSpec,
    upper: f64,
    weight: W,
    ctrl: &ExpansionControl,
) -> Result<KernelSet>
where
    W: Fn(f64) -> f64,
{
    let w2 = osc.omega_r() * osc.omega_r();
    let g2 = osc.gamma0() * osc.gamma0();
    let points = partition(0.0, upper, &[osc.omega_r()], oscillation_width(t));
    let q = integrate_vec(
        |w: f64| {
            let d = w * w - w2;
            let scale = 2.0 * weight(w) / (d * d + 4.0 * g2 * w * w);
            let (s, c) = (w * t).sin_cos();
            let w_2 = w * w;
            [
                w * c * scale,
                w_2 * s * scale,
                w_2 * w * c * scale,
                w_2 * w_2 * s * scale,
            ]
        },
        &points,
        &quad_settings(ctrl),
    )?;
    let v = q.value;
    Ok(KernelSet {
        fc1: v[0],
        fs2: v[1],
        fc3: v[2],
        fs4: v[3],
    })
}

/// Decay length, in units of `T/k`, beyond which `e^{−kω/T}` is negligible.
const DAMPED_RANGE: f64 = 45.0;

/// Sum over `k` of the exponentially damped band integrals coming from
/// `coth(ω/2T) = 1 + 2Σ_k e^{−kω/T}`.
fn low_t_thermal_sum(t: f64, osc: &OscillatorSpec, temperature: f64, ctrl: &ExpansionControl) -> Result<KernelSet> {
    if temperature == 0.0 {
        return Ok(KernelSet::default());
    }
    let mut acc = KernelSet::default();
    let mut last = 0.0;
    for k in 1..=ctrl.k_max {
        let kf = k as f64;
        let term = damped_band_integral(
            t,
            osc,
            DAMPED_RANGE * temperature / kf,
            |w| (-kf * w / temperature).exp(),
            ctrl,
        )?;
        acc += term;
        last = term.max_abs();
        if last < ctrl.rel_tol * acc.max_abs() {
            return Ok(acc);
        }
    }
    if !ctrl.close_tail {
        return Err(Error::SeriesNotConverged {
            terms: ctrl.k_max,
            last_term: last,
        });
    }
    // Remaining terms summed in closed form under the integral.
    let next = ctrl.k_max as f64 + 1.0;
    let tail = damped_band_integral(
        t,
        osc,
        DAMPED_RANGE * temperature / next,
        |w| {
            let x = w / temperature;
            (-next * x).exp() / -(-x).exp_m1()
        },
        ctrl,
    )?;
    Ok(acc + tail)
}

/// Low-temperature correction: exponential-integral bracket plus the damped
/// thermal sum. Exact at `T = 0`, where the sum vanishes.
pub(crate) fn low_t_correction(
    t: f64,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    ctrl: &ExpansionControl,
) -> Result<KernelSet> {
    require_positive_time(t)?;
    let (gamma, omega_tilde) = underdamped_params(osc)?;
    Ok(e1_bracket(t, gamma, omega_tilde, 0.0)? + low_t_thermal_sum(t, osc, bath.temperature, ctrl)?)
}

pub(crate) fn high_t_correction(
    t: f64,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    ctrl: &ExpansionControl,
) -> Result<KernelSet> {
    require_positive_time(t)?;
    if bath.temperature <= 0.0 {
        return Err(Error::DomainError(
            bath.temperature,
            "high-temperature series (needs T > 0)",
        ));
    }
    thermal_series(t, osc, bath.temperature, ctrl)
}

/// The thermal series with the sum over `k ≥ 1` replaced by an integral.
pub(crate) fn integral_correction(t: f64, osc: &OscillatorSpec, bath: &BathSpec) -> Result<KernelSet> {
    require_positive_time(t)?;
    let (gamma, omega_tilde) = underdamped_params(osc)?;
    e1_bracket(t, gamma, omega_tilde, 2.0 * PI * bath.temperature)
}

/// `ΔFC_1(t)` from the low-temperature expansion.
pub fn delta_fc1_low_t(t: f64, osc: &OscillatorSpec, bath: &BathSpec, ctrl: &ExpansionControl) -> Result<f64> {
    Ok(low_t_correction(t, osc, bath, ctrl)?.fc1)
}

/// `ΔFC_1(t)` from the high-temperature (Matsubara) series.
pub fn delta_fc1_high_t(t: f64, osc: &OscillatorSpec, bath: &BathSpec, ctrl: &ExpansionControl) -> Result<f64> {
    Ok(high_t_correction(t, osc, bath, ctrl)?.fc1)
}

/// `ΔFC_1(t)` with the high-temperature series summed as an integral.
pub fn delta_fc1_high_t_integral(t: f64, osc: &OscillatorSpec, bath: &BathSpec) -> Result<f64> {
    if bath.temperature <= 0.0 {
        return Err(Error::DomainError(
            bath.temperature,
            "high-temperature integral form (needs T > 0)",
        ));
    }
    Ok(integral_correction(t, osc, bath)?.fc1)
}

/// `ΔFC_1(t)` of the approximate general solution, exact at `T = 0` and
/// asymptotically exact at high temperature. It coincides with the integral
/// form of the high-temperature series, and reduces to the low-temperature
/// bracket at `T = 0`.
pub fn delta_fc1_general(t: f64, osc: &OscillatorSpec, bath: &BathSpec) -> Result<f64> {
    Ok(integral_correction(t, osc, bath)?.fc1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::integrals::{band_integral, Kernel};
    use approx::assert_relative_eq;

    fn osc() -> OscillatorSpec {
        OscillatorSpec::new(1.0, 1.0, 0.3).unwrap()
    }

    fn ctrl() -> ExpansionControl {
        ExpansionControl {
            rel_tol: 1e-11,
            abs_tol: 1e-15,
            ..ExpansionControl::default()
        }
    }

    #[test]
    fn pole_weight_limits() {
        let w = thermal_pole_weight(0.3, 0.95, 1e-4);
        assert_relative_eq!(w.re, 1.0, epsilon = 1e-14);
        assert!(w.im.abs() < 1e-14);
        let hot = thermal_pole_weight(0.3, 0.95, 1e3);
        assert!(hot.re > 100.0);
    }

    #[test]
    fn e1_bracket_derivatives_match_finite_differences() {
        let (g, w) = (0.3, 0.95_f64.sqrt());
        for x0 in [0.0, 0.7, 6.0] {
            let t = 2.3;
            let h = 1e-4;
            let at = |s: f64| e1_bracket(s, g, w, x0).unwrap();
            let c = at(t);
            let d1 = (at(t + h).fc1 - at(t - h).fc1) / (2.0 * h);
            let d2 = (at(t + h).fc1 - 2.0 * c.fc1 + at(t - h).fc1) / (h * h);
            let d3 = (at(t + h).fs2 - 2.0 * c.fs2 + at(t - h).fs2) / (h * h);
            assert_relative_eq!(c.fs2, -d1, epsilon = 1e-8);
            assert_relative_eq!(c.fc3, -d2, epsilon = 1e-5);
            assert_relative_eq!(c.fs4, -d3, epsilon = 1e-5);
        }
    }

    #[test]
    fn high_t_series_matches_quadrature() {
        let bath = BathSpec::ohmic(10.0, 1e4);
        let (g, w) = underdamped_params(&osc()).unwrap();
        for t in [0.5, 1.0, 5.0] {
            let pole = pole_part(t, g, w, thermal_pole_weight(g, w, 10.0));
            let full = pole + high_t_correction(t, &osc(), &bath, &ctrl()).unwrap();
            let q = band_integral(1, Kernel::Cos, t, &osc(), &bath, &ctrl()).unwrap();
            assert_relative_eq!(full.fc1, q, max_relative = 1e-6);
        }
    }

    #[test]
    fn low_t_expansion_matches_quadrature() {
        let bath = BathSpec::ohmic(0.1, 1e4);
        let (g, w) = underdamped_params(&osc()).unwrap();
        for t in [1.0, 5.0] {
            let full =
                pole_part(t, g, w, Complex64::new(1.0, 0.0)) + low_t_correction(t, &osc(), &bath, &ctrl()).unwrap();
            let q = band_integral(1, Kernel::Cos, t, &osc(), &bath, &ctrl()).unwrap();
            assert_relative_eq!(full.fc1, q, epsilon = 1e-6);
        }
    }

    #[test]
    fn general_reduces_to_low_t_bracket_at_zero_temperature() {
        let bath = BathSpec::ohmic(0.0, 1e3);
        let a = delta_fc1_general(3.0, &osc(), &bath).unwrap();
        let b = delta_fc1_low_t(3.0, &osc(), &bath, &ctrl()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn tail_closure_is_optional() {
        let bath = BathSpec::ohmic(0.1, 1e3);
        let strict = ExpansionControl {
            k_max: 3,
            close_tail: false,
            ..ctrl()
        };
        assert!(matches!(
            delta_fc1_low_t(2.0, &osc(), &bath, &strict),
            Err(Error::SeriesNotConverged { terms: 3, .. })
        ));
        let closed = ExpansionControl { k_max: 3, ..ctrl() };
        let reference = delta_fc1_low_t(2.0, &osc(), &bath, &ctrl()).unwrap();
        assert_relative_eq!(
            delta_fc1_low_t(2.0, &osc(), &bath, &closed).unwrap(),
            reference,
            max_relative = 1e-8
        );
    }

    #[test]
    fn expansions_reject_overdamping_and_zero_time() {
        let od = OscillatorSpec::new(1.0, 1.0, 2.0).unwrap();
        let bath = BathSpec::ohmic(1.0, 1e3);
        assert!(matches!(
            delta_fc1_general(1.0, &od, &bath),
            Err(Error::UnsupportedRegime(_))
        ));
        assert!(delta_fc1_high_t(0.0, &osc(), &bath, &ctrl()).is_err());
    }

    #[test]
    fn high_t_vanishes_as_temperature_grows() {
        let a = delta_fc1_high_t(1.0, &osc(), &BathSpec::ohmic(10.0, 1e3), &ctrl()).unwrap();
        let b = delta_fc1_high_t(1.0, &osc(), &BathSpec::ohmic(100.0, 1e3), &ctrl()).unwrap();
        assert!(b.abs() < 1e-20 && a.abs() > b.abs());
    }
}
