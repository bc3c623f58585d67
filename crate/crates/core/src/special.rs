//! Harmonic number and exponential integrals on the complex plane, plus the
//! hard-band variant of the harmonic number used by cutoff logarithms.
//!
//! `H(z) = γ_E + ψ(z + 1)` is evaluated by shifting the argument upward until
//! `Re ≥ 10` and then summing the Bernoulli asymptotic series of the digamma
//! function. `E1` uses its power series for `|z| ≤ 4` and a continued fraction
//! (modified Lentz) further out, except close to the negative real axis where
//! the fraction stalls: there the power series (which does not cancel on that
//! side) or, for large `|z|`, the asymptotic series takes over.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `B_{2k} / (2k)` for `k = 1..=10`.
const PSI_ASYMPTOTIC: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
    43867.0 / 14364.0,
    -174611.0 / 6600.0,
];

const SHIFT_TARGET: f64 = 10.0;
const SMALL_SHIFT: usize = 10;
const E1_SERIES_RADIUS: f64 = 4.0;
const E1_MAX_ITER: usize = 100_000;
/// Bound on `|z| + Re z`, the digits lost to cancellation in the power series.
const E1_SERIES_LOSS: f64 = 8.0;
/// Beyond this modulus the asymptotic series is accurate to `~e^{-|z|}`.
const E1_ASYMPTOTIC_RADIUS: f64 = 40.0;
const EI_SERIES_LIMIT: f64 = 40.0;

fn check_finite(z: Complex64, what: &'static str) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError(if z.re.is_finite() { z.im } else { z.re }, what))
    }
}

fn near_nonpositive_integer(z: Complex64) -> bool {
    let tol = 64.0 * f64::EPSILON * z.re.abs().max(1.0);
    z.re <= tol && z.im.abs() <= tol && (z.re - z.re.round()).abs() <= tol
}

/// `ln(1 + u)` without cancellation for small `u`.
fn ln_1p(u: Complex64) -> Complex64 {
    let modulus = 0.5 * (2.0 * u.re + u.norm_sqr()).ln_1p();
    let phase = u.im.atan2(1.0 + u.re);
    Complex64::new(modulus, phase)
}

/// `cot(w)` that stays finite for large `|Im w|`.
fn cot(w: Complex64) -> Complex64 {
    let i = Complex64::i();
    if w.im >= 0.0 {
        let e = (2.0 * i * w).exp();
        i * (e + 1.0) / (e - 1.0)
    } else {
        let e = (-2.0 * i * w).exp();
        i * (1.0 + e) / (1.0 - e)
    }
}

/// Bernoulli tail `Σ_k (B_{2k}/2k) w^{-2k}`.
fn bernoulli_tail(w: Complex64) -> Complex64 {
    let inv2 = (w * w).inv();
    PSI_ASYMPTOTIC
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| (acc + c) * inv2)
}

/// Asymptotic series of ψ with no argument shift.
pub(crate) fn digamma_asymptotic(w: Complex64) -> Complex64 {
    w.ln() - 0.5 / w - bernoulli_tail(w)
}

fn digamma_shifted(z: Complex64) -> Complex64 {
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        acc -= w.inv();
        w += 1.0;
    }
    acc + digamma_asymptotic(w)
}

/// Digamma function ψ(z).
pub fn digamma(z: Complex64) -> Result<Complex64> {
    check_finite(z, "digamma")?;
    if near_nonpositive_integer(z) {
        return Err(Error::PoleArgument(z));
    }
    if z.re < 0.5 {
        // reflection: ψ(z) = ψ(1 − z) − π cot(πz)
        Ok(digamma_shifted(1.0 - z) - PI * cot(PI * z))
    } else {
        Ok(digamma_shifted(z))
    }
}

/// Harmonic number `H(z) = γ_E + ψ(z + 1)`.
///
/// Near the origin the value is built from differences that are each
/// proportional to `z`, so `H` keeps full relative accuracy there and
/// `H(0)` is exactly zero.
pub fn harmonic_number(z: Complex64) -> Result<Complex64> {
    check_finite(z, "harmonic number")?;
    if near_nonpositive_integer(z + 1.0) {
        return Err(Error::PoleArgument(z));
    }
    if z.norm() >= 1.0 {
        return Ok(EULER_GAMMA + digamma(z + 1.0)?);
    }
    // H(z) = Σ_{j≤N} z/(j(j+z)) + ψ(N+1+z) − ψ(N+1)
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 1..=SMALL_SHIFT {
        let j = j as f64;
        acc += z / (j * (j + z));
    }
    let w0 = (SMALL_SHIFT + 1) as f64;
    let w = w0 + z;
    let log_part = ln_1p(z / w0);
    let reciprocal_part = z / (2.0 * w * w0);
    let bernoulli_part = bernoulli_tail(w) - bernoulli_tail(Complex64::new(w0, 0.0));
    Ok(acc + log_part + reciprocal_part - bernoulli_part)
}

fn check_e1_domain(z: Complex64) -> Result<()> {
    check_finite(z, "E1")?;
    if z.re == 0.0 && z.im == 0.0 {
        return Err(Error::ZeroArgument);
    }
    if z.im == 0.0 && z.re < 0.0 {
        return Err(Error::BranchCut(z));
    }
    Ok(())
}

fn e1_series(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 1..400 {
        let kf = k as f64;
        term *= -z / kf;
        let inc = term / kf;
        sum += inc;
        if inc.norm() <= 0.5 * f64::EPSILON * sum.norm() {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

/// Continued fraction for `e^z E1(z)`.
fn e1_scaled_cf(z: Complex64) -> Result<Complex64> {
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = b.inv();
    let mut h = d;
    for i in 1..E1_MAX_ITER {
        let a = -((i * i) as f64);
        b += 2.0;
        let mut denom = a * d + b;
        if denom.norm() < tiny {
            denom = Complex64::new(tiny, 0.0);
        }
        d = denom.inv();
        c = b + a / c;
        if c.norm() < tiny {
            c = Complex64::new(tiny, 0.0);
        }
        let del = c * d;
        h *= del;
        if (del - 1.0).norm() <= f64::EPSILON {
            return Ok(h);
        }
    }
    Err(Error::SeriesNotConverged {
        terms: E1_MAX_ITER,
        last_term: h.norm(),
    })
}

/// Which representation of `E1` to use at `z`.
enum E1Route {
    Series,
    Asymptotic,
    ContinuedFraction,
}

fn e1_route(z: Complex64) -> E1Route {
    let r = z.norm();
    if r <= E1_SERIES_RADIUS || (r <= E1_ASYMPTOTIC_RADIUS && r + z.re <= E1_SERIES_LOSS) {
        E1Route::Series
    } else if r > E1_ASYMPTOTIC_RADIUS && r + z.re <= E1_SERIES_LOSS {
        E1Route::Asymptotic
    } else {
        E1Route::ContinuedFraction
    }
}

/// `e^z E1(z) ~ Σ (−1)^k k! / z^{k+1}`, summed to its smallest term.
fn e1_scaled_asymptotic(z: Complex64) -> Complex64 {
    let inv = z.inv();
    let mut term = inv;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        let next = -term * k * inv;
        if next.norm() >= term.norm() || next.norm() <= f64::EPSILON * sum.norm() {
            return sum + next;
        }
        sum += next;
        term = next;
        k += 1.0;
    }
}

/// Exponential integral `E1(z) = ∫_z^∞ e^{-t}/t dt` on the principal branch.
pub fn exp_integral_e1(z: Complex64) -> Result<Complex64> {
    check_e1_domain(z)?;
    match e1_route(z) {
        E1Route::Series => Ok(e1_series(z)),
        E1Route::Asymptotic => Ok(e1_scaled_asymptotic(z) * (-z).exp()),
        E1Route::ContinuedFraction => Ok(e1_scaled_cf(z)? * (-z).exp()),
    }
}

/// `e^z E1(z)`, which stays representable where `E1` alone over- or underflows.
pub fn exp_integral_e1_scaled(z: Complex64) -> Result<Complex64> {
    check_e1_domain(z)?;
    match e1_route(z) {
        E1Route::Series => Ok(e1_series(z) * z.exp()),
        E1Route::Asymptotic => Ok(e1_scaled_asymptotic(z)),
        E1Route::ContinuedFraction => e1_scaled_cf(z),
    }
}

/// Exponential integral `Ei(x)` (Cauchy principal value) for `x > 0`.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(x, "Ei"));
    }
    if x <= EI_SERIES_LIMIT {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..500 {
            let kf = k as f64;
            term *= x / kf;
            let inc = term / kf;
            sum += inc;
            if inc <= 0.5 * f64::EPSILON * sum {
                break;
            }
        }
        Ok(EULER_GAMMA + x.ln() + sum)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..(x as usize) {
            let next = term * k as f64 / x;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term <= 0.5 * f64::EPSILON * sum {
                break;
            }
        }
        Ok(x.exp() / x * sum)
    }
}

/// Hard-band counterpart of `H(x)` for `x = Λ/2πT`:
/// `G(x) = ln x + γ_E − 2 Σ_{k≥1} E1(2πkx)`.
///
/// Thermal integrals that run to a sharp edge at `Λ` produce `G` where the
/// infinitely wide band produces `H`. The two agree up to `1/(2x)`, i.e.
/// `πT/Λ`, and `G → −1/(πx)` as the temperature passes the edge.
pub fn band_edge_harmonic(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(x, "band-edge harmonic"));
    }
    if x < 0.01 {
        // (2/π) Σ atan(x/k)/k − 1/(πx), expanded in x.
        let x2 = x * x;
        let zeta4 = PI.powi(4) / 90.0;
        let zeta6 = PI.powi(6) / 945.0;
        return Ok(
            -1.0 / (PI * x) + PI * x / 3.0 - 2.0 * zeta4 * x * x2 / (3.0 * PI) + 2.0 * zeta6 * x * x2 * x2 / (5.0 * PI)
        );
    }
    let mut tail = 0.0;
    for k in 1.. {
        let a = 2.0 * PI * k as f64 * x;
        let term = exp_integral_e1(Complex64::new(a, 0.0))?.re;
        tail += term;
        // Terms shrink faster than e^{−a}; stop once the next bound is negligible.
        if term <= 1e-17 * tail.abs().max(1.0) || a > 745.0 {
            break;
        }
    }
    Ok(x.ln() + EULER_GAMMA - 2.0 * tail)
}
