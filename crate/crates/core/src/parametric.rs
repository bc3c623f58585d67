//! Time-dependent damping `Γ(t)` and frequency `Ω_r²(t)`.
//!
//! The characteristic curves obey `k̇ = H(t)ᵀ k` with
//! `H(t) = [[0, −1/M], [MΩ_r²(t), 2Γ(t)]]`. Their fundamental matrix `Φ(t)`
//! (columns started from `(1, 0)` and `(0, 1)`) replaces `e^{tHᵀ}`: cumulants
//! are contracted with `Φ(t)^{−ᵀ}` and the noise enters through
//! `σ_T(t) = 2 Φ(t)^{−ᵀ} [∫_0^t Φ(s)ᵀ D(s) Φ(s) ds] Φ(t)^{−1}`.
//!
//! Besides integrating the first-order system directly, `Φ` can be built from
//! the momentum component first, through the undamped oscillator
//! `j̈ + (Ω_r² − Γ² − Γ̇) j = 0` with `k_p = e^{∫Γ} j`, or from the position
//! component first through `k̈_x = (2Γ + (Ω_r²)˙/Ω_r²) k̇_x − Ω_r² k_x`. The
//! three routes agree and serve as cross-checks.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::spectrum::OscillatorSpec;
use crate::wigner::{DiffusionModel, FourierWignerState};

/// A scalar function of time with its exact derivative and integral from 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `mean + amplitude · sin(frequency · t + phase)`
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
    /// `from + (to − from)(1 + tanh((t − center)/width))/2`
    SmoothStep {
        from: f64,
        to: f64,
        center: f64,
        width: f64,
    },
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => mean + amplitude * (frequency * t + phase).sin(),
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => from + 0.5 * (to - from) * (1.0 + ((t - center) / width).tanh()),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant { .. } => 0.0,
            Profile::Sinusoidal {
                amplitude,
                frequency,
                phase,
                ..
            } => amplitude * frequency * (frequency * t + phase).cos(),
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => {
                let sech = 1.0 / ((t - center) / width).cosh();
                0.5 * (to - from) * sech * sech / width
            }
        }
    }

    /// `∫_0^t value(s) ds`
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            Profile::Constant { value } => value * t,
            Profile::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => {
                if frequency == 0.0 {
                    (mean + amplitude * phase.sin()) * t
                } else {
                    mean * t - amplitude / frequency * ((frequency * t + phase).cos() - phase.cos())
                }
            }
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => {
                from * t + 0.5 * (to - from) * (t + width * (ln_cosh((t - center) / width) - ln_cosh(-center / width)))
            }
        }
    }

    fn check(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Profile::Constant { value } => value.is_finite(),
            Profile::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => [mean, amplitude, frequency, phase].iter().all(|x| x.is_finite()),
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => [from, to, center].iter().all(|x| x.is_finite()) && width > 0.0 && width.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid {name} profile {self:?}")))
        }
    }
}

/// Drift with time-dependent damping and squared frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeDependentDrift {
    pub mass: f64,
    pub gamma: Profile,
    pub omega2: Profile,
}

impl TimeDependentDrift {
    pub fn new(mass: f64, gamma: Profile, omega2: Profile) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {mass}")));
        }
        gamma.check("damping")?;
        omega2.check("frequency")?;
        Ok(Self { mass, gamma, omega2 })
    }

    /// The constant drift of an oscillator.
    pub fn constant(osc: &OscillatorSpec) -> Self {
        Self {
            mass: osc.mass(),
            gamma: Profile::Constant { value: osc.gamma0() },
            omega2: Profile::Constant {
                value: osc.omega_r().powi(2),
            },
        }
    }

    /// `H(t)`
    pub fn matrix(&self, t: f64) -> Matrix2<f64> {
        Matrix2::new(
            0.0,
            -1.0 / self.mass,
            self.mass * self.omega2.value(t),
            2.0 * self.gamma.value(t),
        )
    }
}

/// Integration tolerances for the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        Self { rel: 1e-10, abs: 1e-12 }
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Dense-output weights of the continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DenseStep<const N: usize> {
    t0: f64,
    h: f64,
    coeffs: [[f64; N]; 5],
}

/// Piecewise quartic interpolant of an ODE solution.
struct DenseSolution<const N: usize> {
    steps: Vec<DenseStep<N>>,
    t_end: f64,
}

impl<const N: usize> DenseSolution<N> {
    fn eval(&self, t: f64) -> Result<[f64; N]> {
        if !(t >= 0.0 && t <= self.t_end * (1.0 + 1e-14)) {
            return Err(Error::DomainError(
                t,
                "transition matrix time (outside the solved interval)",
            ));
        }
        let idx = self.steps.partition_point(|s| s.t0 + s.h < t).min(self.steps.len() - 1);
        let s = &self.steps[idx];
        let th = ((t - s.t0) / s.h).clamp(0.0, 1.0);
        let th1 = 1.0 - th;
        let r = &s.coeffs;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        Ok(out)
    }
}

fn dormand_prince<const N: usize, F>(
    f: F,
    y0: [f64; N],
    t_end: f64,
    tol: &OdeTolerance,
    breakpoints: &[f64],
) -> Result<DenseSolution<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut t = 0.0;
    let mut y = y0;
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y)?;
    let mut h = (1e-3 * t_end.max(1e-3)).min(0.1);
    let mut steps = Vec::new();
    let mut stops: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > 0.0 && b < t_end).collect();
    stops.push(t_end);
    stops.sort_by(f64::total_cmp);
    let mut next_stop = 0;
    while t < t_end {
        let floor = 1e-14 * t.abs().max(1.0);
        if h < floor {
            return Err(Error::StiffnessFailure { t, step: h });
        }
        let stop = stops[next_stop];
        let mut hit_stop = false;
        if t + h >= stop {
            h = stop - t;
            hit_stop = true;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..N {
                        ys[i] += h * a * kj[i];
                    }
                }
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = A[6][j];
            for i in 0..N {
                y_new[i] += h * a * kj[i];
            }
        }
        let mut err_sq = 0.0;
        for i in 0..N {
            let e: f64 = (0..7).map(|j| E[j] * k[j][i]).sum::<f64>() * h;
            let scale = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err_sq += (e / scale).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();
        if err <= 1.0 {
            let mut coeffs = [[0.0; N]; 5];
            for i in 0..N {
                let diff = y_new[i] - y[i];
                let bspl = h * k[0][i] - diff;
                coeffs[0][i] = y[i];
                coeffs[1][i] = diff;
                coeffs[2][i] = bspl;
                coeffs[3][i] = diff - h * k[6][i] - bspl;
                coeffs[4][i] = h * (0..7).map(|j| D[j] * k[j][i]).sum::<f64>();
            }
            steps.push(DenseStep { t0: t, h, coeffs });
            t = if hit_stop { stop } else { t + h };
            y = y_new;
            if hit_stop {
                next_stop += 1;
                // Restart the derivative at a breakpoint, where it may jump.
                k[0] = f(t, &y)?;
            } else {
                k[0] = k[6];
            }
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= if err <= 1.0 { factor } else { factor.min(1.0) };
    }
    Ok(DenseSolution { steps, t_end })
}

/// Which reduction builds `Φ(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionRoute {
    /// `k̇ = Hᵀ k` directly.
    Direct,
    /// Undamped oscillator for `j = e^{−∫Γ} k_p`, then `k_x` by quadrature.
    MomentumFirst,
    /// Second-order equation for `k_x`, then `k_p` by quadrature.
    PositionFirst,
}

enum DenseKind {
    /// `Φ` by columns, then the three entries of `∫ΦᵀDΦ`.
    Direct(DenseSolution<7>),
    /// `(j, j̇, k_x)` for both columns.
    Momentum(DenseSolution<6>),
    /// `(k_x, k̇_x, ∫e^{−2∫Γ}k_x)` for both columns.
    Position(DenseSolution<6>),
}

/// `Φ(t)` on `[0, t_max]` with dense output.
pub struct TransitionMatrix {
    drift: TimeDependentDrift,
    dense: DenseKind,
}

impl TransitionMatrix {
    pub fn t_max(&self) -> f64 {
        match &self.dense {
            DenseKind::Direct(d) => d.t_end,
            DenseKind::Momentum(d) | DenseKind::Position(d) => d.t_end,
        }
    }

    pub fn phi(&self, t: f64) -> Result<Matrix2<f64>> {
        let m = self.drift.mass;
        match &self.dense {
            DenseKind::Direct(d) => {
                let y = d.eval(t)?;
                Ok(Matrix2::new(y[0], y[2], y[1], y[3]))
            }
            DenseKind::Momentum(d) => {
                let y = d.eval(t)?;
                let grow = self.drift.gamma.integral(t).exp();
                Ok(Matrix2::new(y[2], y[5], grow * y[0], grow * y[3]))
            }
            DenseKind::Position(d) => {
                let y = d.eval(t)?;
                let grow = (2.0 * self.drift.gamma.integral(t)).exp();
                Ok(Matrix2::new(
                    y[0],
                    y[3],
                    (0.0 - y[2] / m) * grow,
                    (1.0 - y[5] / m) * grow,
                ))
            }
        }
    }

    /// `Φ(t)^{−1}`, guarded against a vanishing determinant.
    pub fn inverse(&self, t: f64) -> Result<Matrix2<f64>> {
        let phi = self.phi(t)?;
        let det = phi.determinant();
        if !(det.abs() >= 1e-300) {
            return Err(Error::SingularTransition { t, det });
        }
        Ok(Matrix2::new(phi[(1, 1)], -phi[(0, 1)], -phi[(1, 0)], phi[(0, 0)]) / det)
    }

    /// `∫_0^t Φ(s)ᵀ D(s) Φ(s) ds`; zero unless a diffusion model was supplied.
    pub fn noise_integral(&self, t: f64) -> Result<Matrix2<f64>> {
        match &self.dense {
            DenseKind::Direct(d) => {
                let y = d.eval(t)?;
                Ok(Matrix2::new(y[4], y[5], y[5], y[6]))
            }
            _ => Ok(Matrix2::zeros()),
        }
    }

    pub fn sample(&self, times: &[f64]) -> Result<Vec<Matrix2<f64>>> {
        times.iter().map(|&t| self.phi(t)).collect()
    }
}

fn solve_direct(
    drift: &TimeDependentDrift,
    diffusion: Option<&dyn DiffusionModel>,
    t_max: f64,
    tol: &OdeTolerance,
) -> Result<TransitionMatrix> {
    let rhs = |t: f64, y: &[f64; 7]| -> Result<[f64; 7]> {
        let ht = drift.matrix(t).transpose();
        let phi = Matrix2::new(y[0], y[2], y[1], y[3]);
        let dphi = ht * phi;
        let noise = match diffusion {
            Some(model) => {
                let (d_xp, d_pp) = model.diffusion(t)?;
                phi.transpose() * Matrix2::new(0.0, -d_xp, -d_xp, d_pp) * phi
            }
            None => Matrix2::zeros(),
        };
        Ok([
            dphi[(0, 0)],
            dphi[(1, 0)],
            dphi[(0, 1)],
            dphi[(1, 1)],
            noise[(0, 0)],
            noise[(0, 1)],
            noise[(1, 1)],
        ])
    };
    let mut breaks = Vec::new();
    if let Some(model) = diffusion {
        breaks.push(model.switch_on());
    }
    let dense = dormand_prince(rhs, [1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0], t_max, tol, &breaks)?;
    Ok(TransitionMatrix {
        drift: *drift,
        dense: DenseKind::Direct(dense),
    })
}

fn solve_momentum_first(drift: &TimeDependentDrift, t_max: f64, tol: &OdeTolerance) -> Result<TransitionMatrix> {
    let m = drift.mass;
    let g0 = drift.gamma.value(0.0);
    let rhs = |t: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
        let g = drift.gamma.value(t);
        let w2 = drift.omega2.value(t);
        let potential = w2 - g * g - drift.gamma.derivative(t);
        let grow = drift.gamma.integral(t).exp();
        Ok([
            y[1],
            -potential * y[0],
            m * w2 * grow * y[0],
            y[4],
            -potential * y[3],
            m * w2 * grow * y[3],
        ])
    };
    // Columns (k_x, k_p) = (1, 0) and (0, 1): j(0) = k_p, j̇(0) = −k_x/M + Γ(0)k_p.
    let y0 = [0.0, -1.0 / m, 1.0, 1.0, g0, 0.0];
    let dense = dormand_prince(rhs, y0, t_max, tol, &[])?;
    Ok(TransitionMatrix {
        drift: *drift,
        dense: DenseKind::Momentum(dense),
    })
}

fn solve_position_first(drift: &TimeDependentDrift, t_max: f64, tol: &OdeTolerance) -> Result<TransitionMatrix> {
    let m = drift.mass;
    let w2_0 = drift.omega2.value(0.0);
    let rhs = |t: f64, y: &[f64; 6]| -> Result<[f64; 6]> {
        let g = drift.gamma.value(t);
        let w2 = drift.omega2.value(t);
        if w2 == 0.0 {
            return Err(Error::SingularTransition { t, det: 0.0 });
        }
        let friction = 2.0 * g + drift.omega2.derivative(t) / w2;
        let shrink = (-2.0 * drift.gamma.integral(t)).exp();
        Ok([
            y[1],
            friction * y[1] - w2 * y[0],
            shrink * y[0],
            y[4],
            friction * y[4] - w2 * y[3],
            shrink * y[3],
        ])
    };
    // k̇_x(0) = MΩ_r²(0) k_p(0).
    let y0 = [1.0, 0.0, 0.0, 0.0, m * w2_0, 0.0];
    let dense = dormand_prince(rhs, y0, t_max, tol, &[])?;
    Ok(TransitionMatrix {
        drift: *drift,
        dense: DenseKind::Position(dense),
    })
}

/// `Φ(t)` on `[0, t_max]` by the chosen route.
pub fn solve_transition_via(
    drift: &TimeDependentDrift,
    t_max: f64,
    tol: &OdeTolerance,
    route: TransitionRoute,
) -> Result<TransitionMatrix> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::DomainError(t_max, "transition horizon"));
    }
    match route {
        TransitionRoute::Direct => solve_direct(drift, None, t_max, tol),
        TransitionRoute::MomentumFirst => solve_momentum_first(drift, t_max, tol),
        TransitionRoute::PositionFirst => solve_position_first(drift, t_max, tol),
    }
}

/// `Φ(t)` on `[0, t_max]` by direct integration of `k̇ = Hᵀ k`.
pub fn solve_transition(drift: &TimeDependentDrift, t_max: f64, tol: &OdeTolerance) -> Result<TransitionMatrix> {
    solve_transition_via(drift, t_max, tol, TransitionRoute::Direct)
}

/// Transition matrix together with the accumulated noise, ready to evolve
/// any number of initial states.
pub struct GeneralEvolution {
    transition: TransitionMatrix,
}

impl GeneralEvolution {
    pub fn new(
        drift: &TimeDependentDrift,
        diffusion: &dyn DiffusionModel,
        t_max: f64,
        tol: &OdeTolerance,
    ) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::DomainError(t_max, "evolution horizon"));
        }
        Ok(Self {
            transition: solve_direct(drift, Some(diffusion), t_max, tol)?,
        })
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    /// `σ_T(t) = 2 Φ^{−ᵀ} (∫ΦᵀDΦ) Φ^{−1}`
    pub fn thermal_covariance(&self, t: f64) -> Result<Matrix2<f64>> {
        let inv = self.transition.inverse(t)?;
        let noise = self.transition.noise_integral(t)?;
        Ok(2.0 * inv.transpose() * noise * inv)
    }

    pub fn state(&self, state0: &FourierWignerState, t: f64) -> Result<FourierWignerState> {
        let map = self.transition.inverse(t)?.transpose();
        let mut state = state0.transformed(&map);
        state.covariance += self.thermal_covariance(t)?;
        Ok(state)
    }

    /// Mean at time `t`, `Φ(t)^{−ᵀ} ⟨q⟩(0)`.
    pub fn mean(&self, mean0: &Vector2<f64>, t: f64) -> Result<Vector2<f64>> {
        Ok(self.transition.inverse(t)?.transpose() * mean0)
    }
}

/// Cumulants at time `t` under time-dependent drift and diffusion.
pub fn solve_general(
    state0: &FourierWignerState,
    t: f64,
    drift: &TimeDependentDrift,
    diffusion: &dyn DiffusionModel,
    tol: &OdeTolerance,
) -> Result<FourierWignerState> {
    if t == 0.0 {
        return Ok(state0.clone());
    }
    GeneralEvolution::new(drift, diffusion, t, tol)?.state(state0, t)
}
