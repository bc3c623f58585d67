//! Oscillator parameters, bath spectral densities and their dissipation kernels.
//!
//! The spectral density is an ohmic term with optional supraohmic corrections
//! `γ_n (ω/Λ)^n` and subohmic Laurent terms `φ_n (λ/ω)^{n+1}`, all restricted
//! to the band `λ < ω < Λ`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which side of critical damping the oscillator sits on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    /// `γ0 < Ω_r`, oscillating at `Ω̃ = sqrt(Ω_r² − γ0²)`.
    Underdamped { omega_tilde: f64 },
    /// `γ0 > Ω_r`, with the second rate `γ̃ = sqrt(γ0² − Ω_r²)`.
    Overdamped { gamma_tilde: f64 },
}

/// Mass, renormalized frequency and ohmic damping rate of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorSpec {
    mass: f64,
    omega_r: f64,
    gamma0: f64,
    damping: Damping,
}

impl OscillatorSpec {
    pub fn new(mass: f64, omega_r: f64, gamma0: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        if !(omega_r > 0.0 && omega_r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "omega_r must be positive, got {omega_r}"
            )));
        }
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma0 must be non-negative, got {gamma0}"
            )));
        }
        if (gamma0 - omega_r).abs() <= 1e-12 * omega_r {
            return Err(Error::CriticalDamping(omega_r));
        }
        let damping = if gamma0 < omega_r {
            Damping::Underdamped {
                omega_tilde: ((omega_r - gamma0) * (omega_r + gamma0)).sqrt(),
            }
        } else {
            Damping::Overdamped {
                gamma_tilde: ((gamma0 - omega_r) * (gamma0 + omega_r)).sqrt(),
            }
        };
        Ok(Self {
            mass,
            omega_r,
            gamma0,
            damping,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega_r(&self) -> f64 {
        self.omega_r
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma0
    }

    pub fn damping(&self) -> Damping {
        self.damping
    }

    /// `Ω̃²` continued to `−γ̃²` on the overdamped side.
    pub fn shifted_frequency_sq(&self) -> f64 {
        match self.damping {
            Damping::Underdamped { omega_tilde } => omega_tilde * omega_tilde,
            Damping::Overdamped { gamma_tilde } => -gamma_tilde * gamma_tilde,
        }
    }

    /// `cos(Ω̃t)` or `cosh(γ̃t)`.
    pub(crate) fn even_mode(&self, t: f64) -> f64 {
        match self.damping {
            Damping::Underdamped { omega_tilde } => (omega_tilde * t).cos(),
            Damping::Overdamped { gamma_tilde } => (gamma_tilde * t).cosh(),
        }
    }

    /// `sin(Ω̃t)/Ω̃` or `sinh(γ̃t)/γ̃`.
    pub(crate) fn odd_mode(&self, t: f64) -> f64 {
        match self.damping {
            Damping::Underdamped { omega_tilde } => (omega_tilde * t).sin() / omega_tilde,
            Damping::Overdamped { gamma_tilde } => (gamma_tilde * t).sinh() / gamma_tilde,
        }
    }

    pub(crate) fn require_damping(&self) -> Result<()> {
        if self.gamma0 > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter("operation requires gamma0 > 0".into()))
        }
    }
}

/// A non-fatal note that a parameter or method is outside its comfortable range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegimeWarning(pub String);

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Temperature, band edges and non-ohmic spectrum coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BathSpec {
    pub temperature: f64,
    pub cutoff_uv: f64,
    pub cutoff_ir: f64,
    /// `γ_1, γ_2, …`
    pub supraohmic: Vec<f64>,
    /// `φ_0, φ_1, …`
    pub subohmic: Vec<f64>,
}

impl BathSpec {
    pub fn ohmic(temperature: f64, cutoff_uv: f64) -> Self {
        Self {
            temperature,
            cutoff_uv,
            cutoff_ir: 0.0,
            supraohmic: Vec::new(),
            subohmic: Vec::new(),
        }
    }

    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self.clone()
        }
    }

    pub fn with_cutoff(&self, cutoff_uv: f64) -> Self {
        Self {
            cutoff_uv,
            ..self.clone()
        }
    }

    pub fn is_ohmic(&self) -> bool {
        self.supraohmic.iter().all(|&g| g == 0.0) && self.subohmic.iter().all(|&p| p == 0.0)
    }

    /// Adds the term proportional to `ω^n` in the spectral density.
    ///
    /// `n ≥ 2` sets `γ_{n−1}`, `n ≤ −1` sets `φ_{−n−1}`. The ohmic term `n = 1`
    /// lives on [`OscillatorSpec`], and the flat `n = 0` spectrum is excluded.
    pub fn add_power_term(&mut self, n: i32, coeff: f64) -> Result<()> {
        let slot = match n {
            0 => return Err(Error::ExcludedSpectrum(0)),
            1 => {
                return Err(Error::InvalidParameter(
                    "the ohmic coefficient is gamma0 on the oscillator".into(),
                ))
            }
            n if n >= 2 => {
                let idx = (n - 2) as usize;
                if self.supraohmic.len() <= idx {
                    self.supraohmic.resize(idx + 1, 0.0);
                }
                &mut self.supraohmic[idx]
            }
            n => {
                let idx = (-n - 1) as usize;
                if self.subohmic.len() <= idx {
                    self.subohmic.resize(idx + 1, 0.0);
                }
                &mut self.subohmic[idx]
            }
        };
        *slot = coeff;
        Ok(())
    }

    /// Parameter checks that are cheap enough to run on every coefficient call.
    pub(crate) fn check(&self, osc: &OscillatorSpec) -> Result<Vec<RegimeWarning>> {
        let mut warnings = Vec::new();
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "temperature must be finite and non-negative, got {}",
                self.temperature
            )));
        }
        if !(self.cutoff_uv.is_finite() && self.cutoff_uv >= 10.0 * osc.omega_r()) {
            return Err(Error::InvalidParameter(format!(
                "cutoff {} must be at least 10 omega_r",
                self.cutoff_uv
            )));
        }
        if self.cutoff_uv < 100.0 * osc.omega_r() {
            warnings.push(RegimeWarning(format!(
                "cutoff {} is below 100 omega_r; closed forms assume a wide band",
                self.cutoff_uv
            )));
        }
        if !(self.cutoff_ir >= 0.0 && self.cutoff_ir <= 0.1 * osc.omega_r()) {
            return Err(Error::InvalidParameter(format!(
                "infrared cutoff {} must lie in [0, omega_r/10]",
                self.cutoff_ir
            )));
        }
        if self.supraohmic.iter().chain(&self.subohmic).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("spectrum coefficients must be finite".into()));
        }
        Ok(warnings)
    }

    /// Full validation, including a scan for negative spectral density.
    pub fn validate(&self, osc: &OscillatorSpec) -> Result<Vec<RegimeWarning>> {
        let mut warnings = self.check(osc)?;
        let lo = self.cutoff_ir.max(self.cutoff_uv * 1e-8);
        let hi = self.cutoff_uv;
        let n = 10_000;
        let ratio = (hi / lo).ln();
        let negative = (1..n)
            .map(|i| lo * (ratio * i as f64 / n as f64).exp())
            .find(|&w| spectral_density(self, osc, w) < 0.0);
        if let Some(w) = negative {
            warnings.push(RegimeWarning(format!(
                "spectral density is negative at omega = {w:.6e}"
            )));
        }
        Ok(warnings)
    }
}

/// `ℓ`, `φ` and the frequency-renormalization sum of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectrumShifts {
    /// `Σ_{n≥1} γ_n / n`
    pub ell: f64,
    /// `Σ_{n≥0} φ_n / (n+1)`
    pub phi: f64,
    /// `Σ_{n≥0} γ_n / (n+1)` with `γ_0` the ohmic rate.
    pub freq_renorm_sum: f64,
}

/// Spectral density `I(ω)`; zero outside the band.
pub fn spectral_density(bath: &BathSpec, osc: &OscillatorSpec, omega: f64) -> f64 {
    if !(omega > bath.cutoff_ir && omega < bath.cutoff_uv) {
        return 0.0;
    }
    let m = osc.mass();
    let x = omega / bath.cutoff_uv;
    let mut analytic = osc.gamma0();
    let mut power = 1.0;
    for &g in &bath.supraohmic {
        power *= x;
        analytic += g * power;
    }
    let mut laurent = 0.0;
    if bath.cutoff_ir > 0.0 {
        let y = bath.cutoff_ir / omega;
        let mut power = 1.0;
        for &p in &bath.subohmic {
            power *= y;
            laurent += p * power;
        }
    }
    2.0 / PI * m * (omega * analytic - laurent)
}

/// Laplace transform `μ̂(ζ)` of the dissipation kernel.
pub fn laplace_dissipation(bath: &BathSpec, osc: &OscillatorSpec, zeta: Complex64) -> Result<Complex64> {
    if !(zeta.re > 0.0) {
        return Err(Error::DomainError(zeta.re, "dissipation transform (Re zeta > 0)"));
    }
    let m = osc.mass();
    let cutoff = bath.cutoff_uv;
    let ohmic = m * osc.gamma0() * (zeta - 2.0 / PI * cutoff);
    let supra: f64 = bath
        .supraohmic
        .iter()
        .enumerate()
        .map(|(i, &g)| -2.0 / PI * m * g * cutoff / (i as f64 + 2.0))
        .sum();
    Ok(ohmic + supra)
}

pub fn compute_shifts(bath: &BathSpec, osc: &OscillatorSpec) -> SpectrumShifts {
    let ell = bath
        .supraohmic
        .iter()
        .enumerate()
        .map(|(i, &g)| g / (i as f64 + 1.0))
        .sum();
    let phi = bath
        .subohmic
        .iter()
        .enumerate()
        .map(|(i, &p)| p / (i as f64 + 1.0))
        .sum();
    let freq_renorm_sum = osc.gamma0()
        + bath
            .supraohmic
            .iter()
            .enumerate()
            .map(|(i, &g)| g / (i as f64 + 2.0))
            .sum::<f64>();
    SpectrumShifts {
        ell,
        phi,
        freq_renorm_sum,
    }
}

/// Bare frequency squared `Ω_r² + (4/π) Λ Σ γ_n/(n+1)`, for reporting only.
pub fn bare_frequency_sq(bath: &BathSpec, osc: &OscillatorSpec) -> f64 {
    let shifts = compute_shifts(bath, osc);
    osc.omega_r().powi(2) + 4.0 / PI * bath.cutoff_uv * shifts.freq_renorm_sum
}
