//! Diffusion coefficients `D_xp(t)`, `D_pp(t)` of the master equation.
//!
//! Time-dependent coefficients are assembled from the integral family
//! `FI_1, FI_3, FC_1(t), FS_2(t), FC_3(t), FS_4(t)`. The quadrature oracle
//! integrates each member over the hard-cutoff band; the expansion methods
//! use the closed forms for `FI_1`, `FI_3` and an analytic representation of
//! `FC_1(t)` whose derivatives supply the rest. Late-time, extreme-temperature
//! and weak-coupling (CCR) values are closed forms.

mod expansions;
mod integrals;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

pub use expansions::{delta_fc1_general, delta_fc1_high_t, delta_fc1_high_t_integral, delta_fc1_low_t, KernelSet};
pub use integrals::{fc_n_oracle, fi1_closed, fi3_closed, fs_n_oracle, harmonic_brackets, HarmonicBrackets, Kernel};

use crate::error::{Error, Result};
use crate::spectrum::{compute_shifts, BathSpec, OscillatorSpec, RegimeWarning};
use expansions::{pole_part, thermal_pole_weight, underdamped_params};
use integrals::band_integral;

/// Route by which a diffusion pair was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Oracle,
    LowT,
    HighT,
    GeneralApprox,
    LateTime,
    ExtremeT,
    Ccr,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Oracle,
        Method::LowT,
        Method::HighT,
        Method::GeneralApprox,
        Method::LateTime,
        Method::ExtremeT,
        Method::Ccr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::LowT => "low_t",
            Method::HighT => "high_t",
            Method::GeneralApprox => "general",
            Method::LateTime => "late",
            Method::ExtremeT => "extreme_t",
            Method::Ccr => "ccr",
        }
    }

    /// Whether the method yields a time-dependent `FC_1(t)`.
    pub fn is_time_dependent(self) -> bool {
        matches!(
            self,
            Method::Oracle | Method::LowT | Method::HighT | Method::GeneralApprox
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Truncation and tolerance settings shared by the series and the quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionControl {
    pub k_max: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Close a series that reaches `k_max` with an integral estimate of its
    /// remainder instead of failing.
    pub close_tail: bool,
}

impl Default for ExpansionControl {
    fn default() -> Self {
        Self {
            k_max: 200,
            rel_tol: 1e-8,
            abs_tol: 1e-13,
            close_tail: true,
        }
    }
}

/// The integral family at one time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyIntegrals {
    pub t: f64,
    pub fi1: f64,
    pub fi3: f64,
    pub fc1: f64,
    pub fs2: f64,
    pub fc3: f64,
    pub fs4: f64,
}

/// `D_xp` and `D_pp` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionPair {
    pub d_xp: f64,
    pub d_pp: f64,
    pub t: f64,
    pub method: Method,
    pub warnings: Vec<RegimeWarning>,
}

/// Evaluates the integral family with a time-dependent method.
pub fn frequency_integrals(
    t: f64,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    method: Method,
    ctrl: &ExpansionControl,
) -> Result<FrequencyIntegrals> {
    let kernels = match method {
        Method::Oracle => {
            let q = |n, kernel| band_integral(n, kernel, t, osc, bath, ctrl);
            return Ok(FrequencyIntegrals {
                t,
                fi1: band_integral(1, Kernel::Cos, 0.0, osc, bath, ctrl)?,
                fi3: band_integral(3, Kernel::Cos, 0.0, osc, bath, ctrl)?,
                fc1: q(1, Kernel::Cos)?,
                fs2: q(2, Kernel::Sin)?,
                fc3: q(3, Kernel::Cos)?,
                fs4: q(4, Kernel::Sin)?,
            });
        }
        Method::LowT => {
            let (g, w) = underdamped_params(osc)?;
            pole_part(t, g, w, Complex64::new(1.0, 0.0)) + expansions::low_t_correction(t, osc, bath, ctrl)?
        }
        Method::HighT => {
            let (g, w) = underdamped_params(osc)?;
            pole_part(t, g, w, thermal_pole_weight(g, w, bath.temperature))
                + expansions::high_t_correction(t, osc, bath, ctrl)?
        }
        Method::GeneralApprox => {
            let (g, w) = underdamped_params(osc)?;
            pole_part(t, g, w, thermal_pole_weight(g, w, bath.temperature))
                + expansions::integral_correction(t, osc, bath)?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "method '{other}' has no time-dependent frequency integrals"
            )))
        }
    };
    Ok(FrequencyIntegrals {
        t,
        fi1: fi1_closed(osc, bath)?,
        fi3: fi3_closed(osc, bath)?,
        fc1: kernels.fc1,
        fs2: kernels.fs2,
        fc3: kernels.fc3,
        fs4: kernels.fs4,
    })
}

/// Applies the Laurent and supraohmic substitutions to `FI_1`, `FI_3`, `FC_1`.
fn shifted(fi: &FrequencyIntegrals, osc: &OscillatorSpec, bath: &BathSpec) -> FrequencyIntegrals {
    let shifts = compute_shifts(bath, osc);
    if shifts.ell == 0.0 && shifts.phi == 0.0 {
        return *fi;
    }
    let g = osc.gamma0();
    let laurent = 2.0 * bath.temperature * shifts.phi / (g * osc.omega_r().powi(4));
    FrequencyIntegrals {
        fi1: fi.fi1 - laurent,
        fi3: fi.fi3 + shifts.ell / g,
        fc1: fi.fc1 - laurent * (bath.cutoff_ir * fi.t).cos(),
        ..*fi
    }
}

/// `(D_xp, D_pp)` from the integral family.
pub fn assemble(fi: &FrequencyIntegrals, osc: &OscillatorSpec) -> (f64, f64) {
    let (m, g) = (osc.mass(), osc.gamma0());
    let w2 = osc.omega_r() * osc.omega_r();
    let wt2 = osc.shifted_frequency_sq();
    let t = fi.t;
    let decay = (-g * t).exp();
    let even = osc.even_mode(t) * decay;
    let odd = osc.odd_mode(t) * decay;
    let d_xp = g / PI * (fi.fi3 - w2 * fi.fi1) - g / PI * even * (fi.fc3 - w2 * fi.fc1 + 2.0 * g * fi.fs2)
        + g / PI * odd * (g * (fi.fc3 + w2 * fi.fc1) + (wt2 - g * g) * fi.fs2 - fi.fs4);
    let d_pp = 4.0 * m * g * g / PI * fi.fi3
        - 2.0 * m * g / PI * even * (2.0 * g * fi.fc3 + w2 * fi.fs2 - fi.fs4)
        - 2.0 * m * g / PI * odd * (-w2 * w2 * fi.fc1 + (wt2 - g * g) * fi.fc3 + g * (w2 * fi.fs2 + fi.fs4));
    (d_xp, d_pp)
}

fn method_warnings(t: f64, osc: &OscillatorSpec, bath: &BathSpec, method: Method) -> Vec<RegimeWarning> {
    let temp = bath.temperature;
    let mut out = Vec::new();
    match method {
        Method::LowT if temp > osc.omega_r() => out.push(RegimeWarning(format!(
            "low-temperature expansion used at T = {temp} > omega_r = {}",
            osc.omega_r()
        ))),
        Method::HighT if 2.0 * PI * temp * t < 1.0 => out.push(RegimeWarning(format!(
            "high-temperature series used at 2*pi*T*t = {:.3} < 1",
            2.0 * PI * temp * t
        ))),
        Method::ExtremeT if temp < bath.cutoff_uv => out.push(RegimeWarning(format!(
            "extreme-temperature limit used at T = {temp} below the cutoff {}",
            bath.cutoff_uv
        ))),
        _ => {}
    }
    out
}

/// Diffusion coefficients at time `t > 0` by the chosen route.
pub fn diffusion_at(
    t: f64,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    method: Method,
    ctrl: &ExpansionControl,
) -> Result<DiffusionPair> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::DomainError(t, "diffusion time (needs t > 0)"));
    }
    let mut pair = match method {
        Method::LateTime => diffusion_late(osc, bath)?,
        Method::ExtremeT => diffusion_extreme_t(osc, bath)?,
        Method::Ccr => diffusion_ccr(osc, bath)?,
        _ => {
            let mut warnings = bath.check(osc)?;
            warnings.extend(method_warnings(t, osc, bath, method));
            let fi = shifted(&frequency_integrals(t, osc, bath, method, ctrl)?, osc, bath);
            let (d_xp, d_pp) = assemble(&fi, osc);
            DiffusionPair {
                d_xp,
                d_pp,
                t,
                method,
                warnings,
            }
        }
    };
    pair.t = t;
    Ok(pair)
}

fn late_pair(osc: &OscillatorSpec, bath: &BathSpec, keep_cutoff: bool, method: Method) -> Result<DiffusionPair> {
    osc.require_damping()?;
    let warnings = bath.check(osc)?;
    let (m, g) = (osc.mass(), osc.gamma0());
    let w2 = osc.omega_r() * osc.omega_r();
    let b = harmonic_brackets(osc, bath)?;
    let re = if keep_cutoff { b.re_cutoff } else { 0.0 };
    let shifts = compute_shifts(bath, osc);
    let d_xp =
        -g * g / PI * b.im_over_freq + g / PI * re + shifts.ell / PI + 2.0 * bath.temperature * shifts.phi / (PI * w2);
    let d_pp = 2.0 * m * g * bath.temperature
        + 2.0 * m * g / PI * (osc.shifted_frequency_sq() - g * g) * b.im_over_freq
        + 4.0 * m * g * g / PI * re
        + 4.0 * m * g / PI * shifts.ell;
    Ok(DiffusionPair {
        d_xp,
        d_pp,
        t: f64::INFINITY,
        method,
        warnings,
    })
}

/// Exact coefficients for times long after the relaxation time `1/γ0`.
pub fn diffusion_late(osc: &OscillatorSpec, bath: &BathSpec) -> Result<DiffusionPair> {
    late_pair(osc, bath, true, Method::LateTime)
}

/// Late-time coefficients with the cutoff brackets `G(Λ/2πT) − Re H(·)`
/// removed from both entries. This variant is unphysical at low temperature
/// and strong coupling and is provided for comparison only.
pub fn diffusion_late_subtracted(osc: &OscillatorSpec, bath: &BathSpec) -> Result<DiffusionPair> {
    late_pair(osc, bath, false, Method::LateTime)
}

/// The limit `T ≫ Λ`: `D_xp = 0`, `D_pp = 2Mγ0T`.
pub fn diffusion_extreme_t(osc: &OscillatorSpec, bath: &BathSpec) -> Result<DiffusionPair> {
    let mut warnings = bath.check(osc)?;
    warnings.extend(method_warnings(f64::INFINITY, osc, bath, Method::ExtremeT));
    Ok(DiffusionPair {
        d_xp: 0.0,
        d_pp: 2.0 * osc.mass() * osc.gamma0() * bath.temperature,
        t: f64::INFINITY,
        method: Method::ExtremeT,
        warnings,
    })
}

/// Weak-coupling Markovian coefficients: no anomalous term and
/// `D_pp = γ0 M Ω_r coth(Ω_r / 2T)`.
pub fn diffusion_ccr(osc: &OscillatorSpec, bath: &BathSpec) -> Result<DiffusionPair> {
    let warnings = bath.check(osc)?;
    let w = osc.omega_r();
    let coth = if bath.temperature == 0.0 {
        1.0
    } else {
        1.0 / (w / (2.0 * bath.temperature)).tanh()
    };
    Ok(DiffusionPair {
        d_xp: 0.0,
        d_pp: osc.gamma0() * osc.mass() * w * coth,
        t: f64::INFINITY,
        method: Method::Ccr,
        warnings,
    })
}

/// `FI_1`, `FI_3` after the spectrum substitutions, as used by the late-time
/// coefficients and the equilibrium covariance.
pub fn static_integrals(osc: &OscillatorSpec, bath: &BathSpec) -> Result<(f64, f64)> {
    let base = FrequencyIntegrals {
        t: 0.0,
        fi1: fi1_closed(osc, bath)?,
        fi3: fi3_closed(osc, bath)?,
        fc1: 0.0,
        fs2: 0.0,
        fc3: 0.0,
        fs4: 0.0,
    };
    let s = shifted(&base, osc, bath);
    Ok((s.fi1, s.fi3))
}
