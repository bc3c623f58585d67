//! Slow reference computations for cross-checking the production engine.
//!
//! Everything here is deliberately naive: fixed composite rules with dyadic
//! refinement, raw power series and partial sums, closed-form antiderivatives.
//! Nothing is shared with the production code, and nothing adapts, so each
//! routine can be read and checked by hand.

use std::f64::consts::PI;

use num_complex::Complex64;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// A reference value with an honest error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleReport<V> {
    pub value: V,
    pub est_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutOfDomain(pub &'static str);

impl std::fmt::Display for OutOfDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "argument outside the convergence domain of {}", self.0)
    }
}

impl std::error::Error for OutOfDomain {}

/// Oscillator and bath parameters as plain numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub mass: f64,
    pub omega_r: f64,
    pub gamma0: f64,
    pub temperature: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

fn band_integrand(n: u32, trig: Trig, t: f64, p: &Params, w: f64) -> f64 {
    let coth = if p.temperature == 0.0 {
        1.0
    } else {
        1.0 / (w / (2.0 * p.temperature)).tanh()
    };
    let d = w * w - p.omega_r * p.omega_r;
    let den = d * d + 4.0 * p.gamma0 * p.gamma0 * w * w;
    let kernel = match trig {
        Trig::Cos => (w * t).cos(),
        Trig::Sin => (w * t).sin(),
    };
    w.powi(n as i32) * kernel * coth / den
}

fn midpoint<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Composite midpoint on `segments`, refined `levels` times by doubling, with
/// one Richardson step on the last two refinements.
fn richardson_midpoint<F: Fn(f64) -> f64>(f: F, segments: &[(f64, f64, usize)], levels: u32) -> OracleReport<f64> {
    let mut previous = f64::NAN;
    let mut current = f64::NAN;
    let mut evaluations = 0;
    for level in 0..levels {
        previous = current;
        current = 0.0;
        for &(a, b, base) in segments {
            let panels = base << level;
            current += midpoint(&f, a, b, panels);
            evaluations += panels;
        }
    }
    let value = (4.0 * current - previous) / 3.0;
    OracleReport {
        value,
        est_error: (value - current).abs(),
        evaluations,
    }
}

/// The band is cut at `4Ω_r` so the resonance gets a fine uniform grid. The
/// tail grid resolves both the oscillation of `ωt` and the power-law decay
/// just past the knee.
fn band_segments(t: f64, p: &Params) -> [(f64, f64, usize); 2] {
    let knee = (4.0 * p.omega_r).min(p.cutoff);
    let near = (4096.0 * p.omega_r / p.gamma0.max(0.05)).ceil() as usize;
    let far = ((p.cutoff - knee) * (4.0 * t).max(8.0 / p.omega_r)).ceil() as usize + 64;
    [(0.0, knee, near), (knee, p.cutoff, far)]
}

/// `∫_0^Λ ω^n trig(ωt) coth(ω/2T) / [(ω²−Ω_r²)² + 4γ0²ω²] dω` by brute force.
/// `levels` must be at least 3.
pub fn brute_fc_n(n: u32, trig: Trig, t: f64, p: &Params, levels: u32) -> OracleReport<f64> {
    assert!(levels >= 3, "at least three refinement levels are needed");
    richardson_midpoint(|w| band_integrand(n, trig, t, p, w), &band_segments(t, p), levels)
}

/// `FI_1` at `T = 0` from the rational antiderivative:
/// `[atan((Λ²−a)/b) + atan(a/b)] / (4γ0Ω̃)` with `a = Ω_r² − 2γ0²`, `b = 2γ0Ω̃`.
pub fn zero_temperature_fi1(p: &Params) -> f64 {
    let w2 = p.omega_r * p.omega_r;
    let g = p.gamma0;
    let wt = (w2 - g * g).sqrt();
    let a = w2 - 2.0 * g * g;
    let b = 2.0 * g * wt;
    (((p.cutoff * p.cutoff - a) / b).atan() + (a / b).atan()) / (4.0 * g * wt)
}

/// Which reference series to sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialFn {
    /// `Σ_{k=1}^{n} 1/k` for a non-negative integer `z`.
    HarmonicPartialSum,
    /// `−γ_E − ln z − Σ (−z)^k / (k·k!)`.
    E1Series,
    /// `γ_E + ln x + Σ x^k / (k·k!)` for real `x > 0`.
    EiSeries,
}

/// Partial sums of the defining series; `terms` bounds the work.
pub fn brute_special(f: SpecialFn, z: Complex64, terms: usize) -> Result<OracleReport<Complex64>, OutOfDomain> {
    match f {
        SpecialFn::HarmonicPartialSum => {
            let n = z.re;
            if z.im != 0.0 || n < 0.0 || n.fract() != 0.0 {
                return Err(OutOfDomain("harmonic partial sum"));
            }
            let n = n as usize;
            // Summed from the small end to limit rounding.
            let value: f64 = (1..=n).rev().map(|k| 1.0 / k as f64).sum();
            Ok(OracleReport {
                value: Complex64::new(value, 0.0),
                est_error: n as f64 * f64::EPSILON * value,
                evaluations: n,
            })
        }
        SpecialFn::E1Series => {
            if z.norm() == 0.0 || (z.im == 0.0 && z.re < 0.0) || z.norm() > 10.0 {
                return Err(OutOfDomain("E1 power series"));
            }
            let mut term = Complex64::new(1.0, 0.0);
            let mut sum = Complex64::new(0.0, 0.0);
            let mut last = 0.0;
            for k in 1..=terms {
                term *= -z / k as f64;
                let add = term / k as f64;
                sum += add;
                last = add.norm();
                if last < 1e-18 * sum.norm() {
                    break;
                }
            }
            Ok(OracleReport {
                value: -EULER_GAMMA - z.ln() - sum,
                est_error: last,
                evaluations: terms,
            })
        }
        SpecialFn::EiSeries => {
            if z.im != 0.0 || z.re <= 0.0 {
                return Err(OutOfDomain("Ei power series"));
            }
            let x = z.re;
            let mut term = 1.0;
            let mut sum = 0.0;
            let mut last = 0.0;
            for k in 1..=terms {
                term *= x / k as f64;
                let add = term / k as f64;
                sum += add;
                last = add;
                if add < 1e-18 * sum {
                    break;
                }
            }
            Ok(OracleReport {
                value: Complex64::new(EULER_GAMMA + x.ln() + sum, 0.0),
                est_error: last,
                evaluations: terms,
            })
        }
    }
}

/// Steady-state amplitude `|G̃(ω_d)| = 1 / (M sqrt((Ω_r²−ω_d²)² + 4γ0²ω_d²))`
/// of the position response to a unit sinusoidal force.
pub fn forced_response_amplitude(mass: f64, omega_r: f64, gamma0: f64, drive: f64) -> f64 {
    let d = omega_r * omega_r - drive * drive;
    1.0 / (mass * (d * d + 4.0 * gamma0 * gamma0 * drive * drive).sqrt())
}

/// Gaussian linear entropy `1 − ½ det(σ)^{−1/2}` from the raw 2×2 entries.
pub fn gaussian_linear_entropy(sxx: f64, sxp: f64, spp: f64) -> f64 {
    1.0 - 0.5 / (sxx * spp - sxp * sxp).sqrt()
}

/// The thermal occupation weight `coth(Ω/2T)`, used for weak-coupling
/// reference values.
pub fn coth_half(omega: f64, temperature: f64) -> f64 {
    if temperature == 0.0 {
        1.0
    } else {
        1.0 / (omega / (2.0 * temperature)).tanh()
    }
}

/// `π T / (2 γ0 Ω_r²)`: the leading high-temperature term of `FI_1`.
pub fn classical_fi1(p: &Params) -> f64 {
    PI * p.temperature / (2.0 * p.gamma0 * p.omega_r * p.omega_r)
}
