//! Exact evolution of the Wigner function in the Fourier domain.
//!
//! # Conventions
//!
//! Phase-space points are `q = (x, p)`. The drift matrix is
//! `H = [[0, −1/M], [MΩ_r², 2γ0]]`, so the noiseless equations of motion read
//! `q̇ = −H q` and the mean evolves as `⟨q⟩(t) = U(t)⟨q⟩(0)` with the
//! propagator `U(t) = e^{−tH}`. The characteristic function is
//! `F(k) = ⟨e^{−i k·q}⟩`, and the exact solution maps wavevectors as
//! `k ↦ U(t)ᵀ k`, i.e. `F_t(k) = F_0(U(t)ᵀ k) · exp(−½ kᵀ σ_T(t) k)`. In index
//! form a cumulant tensor is contracted as `κ'_{i…} = U_{ij}… κ_{j…}`, which is
//! the same statement written with `e^{−tHᵀ}` acting on the wavevector side.
//! Every transpose in this crate follows from these three lines.
//!
//! The thermal covariance is `σ_T(t) = 2∫_0^t U(t−s) D(s) U(t−s)ᵀ ds` with
//! `D = [[0, −D_xp], [−D_xp, D_pp]]`.

use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};

use crate::coefficients::{diffusion_at, diffusion_late, static_integrals, DiffusionPair, ExpansionControl, Method};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_vec, partition, QuadSettings};
use crate::spectrum::{BathSpec, OscillatorSpec};

/// Highest cumulant order stored unless raised explicitly.
pub const DEFAULT_MAX_ORDER: usize = 4;

/// `H = [[0, −1/M], [MΩ_r², 2γ0]]`
pub fn drift_matrix(osc: &OscillatorSpec) -> Matrix2<f64> {
    let m = osc.mass();
    Matrix2::new(0.0, -1.0 / m, m * osc.omega_r().powi(2), 2.0 * osc.gamma0())
}

/// `U(t) = e^{−tH}`, built from the retarded Green function of the damped
/// oscillator in real arithmetic on either side of critical damping.
pub fn propagator(t: f64, osc: &OscillatorSpec) -> Matrix2<f64> {
    let m = osc.mass();
    let g = osc.gamma0();
    let decay = (-g * t).exp();
    let even = osc.even_mode(t);
    let odd = osc.odd_mode(t);
    decay
        * Matrix2::new(
            even + g * odd,
            odd / m,
            -m * osc.omega_r().powi(2) * odd,
            even - g * odd,
        )
}

fn diffusion_matrix(d_xp: f64, d_pp: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, -d_xp, -d_xp, d_pp)
}

/// A source of `(D_xp(s), D_pp(s))`.
pub trait DiffusionModel: Sync {
    fn diffusion(&self, s: f64) -> Result<(f64, f64)>;

    /// Times before which the coefficients vanish; the `σ_T` quadrature
    /// splits its range there.
    fn switch_on(&self) -> f64 {
        0.0
    }

    /// Interior points where the coefficients lose smoothness.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Time-independent coefficients, typically the late-time values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantDiffusion {
    pub d_xp: f64,
    pub d_pp: f64,
}

impl From<&DiffusionPair> for ConstantDiffusion {
    fn from(p: &DiffusionPair) -> Self {
        Self {
            d_xp: p.d_xp,
            d_pp: p.d_pp,
        }
    }
}

impl DiffusionModel for ConstantDiffusion {
    fn diffusion(&self, _s: f64) -> Result<(f64, f64)> {
        Ok((self.d_xp, self.d_pp))
    }
}

/// Settings for the tabulated time-dependent coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheSettings {
    /// The coefficients are taken to vanish before this time. The expansions
    /// describe times long after the cutoff scale `1/Λ` and blow up as `1/s`
    /// below it, so the default is `10/Λ`.
    pub switch_on: Option<f64>,
    /// Interpolation tolerance relative to the late-time coefficient scale.
    pub tol: f64,
    /// Chebyshev degree per panel.
    pub degree: usize,
    /// Widest panel allowed.
    pub max_width: f64,
}

impl Default for CacheSettings {
    fn default() -> Self {
        Self {
            switch_on: None,
            tol: 1e-8,
            degree: 16,
            max_width: 1.0,
        }
    }
}

struct ChebPanel {
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    values: Vec<[f64; 2]>,
}

fn lobatto_nodes(a: f64, b: f64, degree: usize) -> Vec<f64> {
    (0..=degree)
        .map(|j| {
            let x = (PI * j as f64 / degree as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect()
}

impl ChebPanel {
    /// Barycentric interpolation on Chebyshev–Lobatto points.
    fn eval(&self, s: f64) -> [f64; 2] {
        let n = self.nodes.len() - 1;
        let mut num = [0.0; 2];
        let mut den = 0.0;
        for (j, (&x, v)) in self.nodes.iter().zip(&self.values).enumerate() {
            let diff = s - x;
            if diff == 0.0 {
                return *v;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            let c = w / diff;
            num[0] += c * v[0];
            num[1] += c * v[1];
            den += c;
        }
        [num[0] / den, num[1] / den]
    }
}

/// Time-dependent coefficients from one of the `FC_1` routes, tabulated on
/// geometrically graded Chebyshev panels so that `σ_T` quadratures do not
/// re-evaluate the expansions at every node.
pub struct CachedDiffusion {
    osc: OscillatorSpec,
    bath: BathSpec,
    method: Method,
    ctrl: ExpansionControl,
    switch_on: f64,
    panels: Vec<ChebPanel>,
}

impl CachedDiffusion {
    pub fn build(
        osc: &OscillatorSpec,
        bath: &BathSpec,
        method: Method,
        ctrl: &ExpansionControl,
        horizon: f64,
        settings: &CacheSettings,
    ) -> Result<Self> {
        if !method.is_time_dependent() {
            return Err(Error::InvalidParameter(format!(
                "method '{method}' is not time dependent"
            )));
        }
        let switch_on = settings.switch_on.unwrap_or(10.0 / bath.cutoff_uv);
        if !(switch_on > 0.0) {
            return Err(Error::InvalidParameter("switch-on time must be positive".into()));
        }
        let mut cache = Self {
            osc: *osc,
            bath: bath.clone(),
            method,
            ctrl: *ctrl,
            switch_on,
            panels: Vec::new(),
        };
        if horizon <= switch_on {
            return Ok(cache);
        }
        let late = diffusion_late(osc, bath).ok();
        let scale = late.map_or(1.0, |p| p.d_xp.abs().max(p.d_pp.abs()));
        let mut edges = vec![switch_on];
        let mut s = switch_on;
        while s < horizon {
            s = (2.0 * s).min(s + settings.max_width).min(horizon);
            edges.push(s);
        }
        for w in edges.windows(2) {
            cache.fit(w[0], w[1], settings, scale, 0)?;
        }
        Ok(cache)
    }

    fn direct(&self, s: f64) -> Result<[f64; 2]> {
        let p = diffusion_at(s, &self.osc, &self.bath, self.method, &self.ctrl)?;
        Ok([p.d_xp, p.d_pp])
    }

    fn fit(&mut self, a: f64, b: f64, settings: &CacheSettings, scale: f64, depth: usize) -> Result<()> {
        let nodes = lobatto_nodes(a, b, settings.degree);
        let values = nodes.iter().map(|&s| self.direct(s)).collect::<Result<Vec<_>>>()?;
        let panel = ChebPanel { a, b, nodes, values };
        let local = panel
            .values
            .iter()
            .fold(scale, |m, v| m.max(v[0].abs()).max(v[1].abs()));
        let probes = lobatto_nodes(a, b, 2 * settings.degree);
        let mut worst: f64 = 0.0;
        for &s in probes.iter().skip(1).step_by(2) {
            let exact = self.direct(s)?;
            let approx = panel.eval(s);
            worst = worst
                .max((exact[0] - approx[0]).abs())
                .max((exact[1] - approx[1]).abs());
        }
        if worst <= settings.tol * local || depth >= 30 {
            self.panels.push(panel);
            return Ok(());
        }
        let mid = 0.5 * (a + b);
        self.fit(a, mid, settings, scale, depth + 1)?;
        self.fit(mid, b, settings, scale, depth + 1)
    }

    pub fn panel_count(&self) -> usize {
        self.panels.len()
    }
}

impl DiffusionModel for CachedDiffusion {
    fn diffusion(&self, s: f64) -> Result<(f64, f64)> {
        if s < self.switch_on {
            return Ok((0.0, 0.0));
        }
        let idx = self.panels.partition_point(|p| p.b < s);
        match self.panels.get(idx) {
            Some(p) if s >= p.a => {
                let v = p.eval(s);
                Ok((v[0], v[1]))
            }
            _ => {
                let v = self.direct(s)?;
                Ok((v[0], v[1]))
            }
        }
    }

    fn switch_on(&self) -> f64 {
        self.switch_on
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.panels.iter().map(|p| p.a).collect()
    }
}

/// `σ_T(t)` at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalCovariance {
    pub t: f64,
    pub sigma: Matrix2<f64>,
}

impl ThermalCovariance {
    pub fn zero() -> Self {
        Self {
            t: 0.0,
            sigma: Matrix2::zeros(),
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.sigma).eigenvalues.min()
    }
}

/// `σ_T(t)` for an arbitrary diffusion model.
pub fn thermal_covariance_with(
    t: f64,
    osc: &OscillatorSpec,
    model: &dyn DiffusionModel,
    settings: &QuadSettings,
) -> Result<ThermalCovariance> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::DomainError(t, "thermal covariance time"));
    }
    let start = model.switch_on();
    if t <= start {
        return Ok(ThermalCovariance {
            t,
            sigma: Matrix2::zeros(),
        });
    }
    let mut splits = model.breakpoints();
    splits.push(start);
    let points = partition(start, t, &splits, 1.0);
    let mut failure = None;
    let q = integrate_vec(
        |s| {
            let (d_xp, d_pp) = model.diffusion(s).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                (0.0, 0.0)
            });
            let u = propagator(t - s, osc);
            let m = u * diffusion_matrix(d_xp, d_pp) * u.transpose();
            [2.0 * m[(0, 0)], 2.0 * m[(0, 1)], 2.0 * m[(1, 1)]]
        },
        &points,
        settings,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let [xx, xp, pp] = q.value;
    Ok(ThermalCovariance {
        t,
        sigma: Matrix2::new(xx, xp, xp, pp),
    })
}

/// `σ_T(t)` with `D(s)` from the chosen coefficient route.
pub fn thermal_covariance(
    t: f64,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    method: Method,
    ctrl: &ExpansionControl,
) -> Result<ThermalCovariance> {
    let settings = QuadSettings {
        rel_tol: 1e-10,
        ..QuadSettings::default()
    };
    if method.is_time_dependent() {
        let cache = CachedDiffusion::build(osc, bath, method, ctrl, t, &CacheSettings::default())?;
        thermal_covariance_with(t, osc, &cache, &settings)
    } else {
        let pair = diffusion_at(1.0, osc, bath, method, ctrl)?;
        thermal_covariance_with(t, osc, &ConstantDiffusion::from(&pair), &settings)
    }
}

/// Limit of `σ_T(t)` for constant coefficients:
/// `σ_xx = (D_pp/2γ0 − 2M D_xp)/(MΩ_r)²`, `σ_pp = D_pp/2γ0`, no correlation.
pub fn stationary_covariance(pair: &DiffusionPair, osc: &OscillatorSpec) -> Result<Matrix2<f64>> {
    osc.require_damping()?;
    let (m, g) = (osc.mass(), osc.gamma0());
    let spp = pair.d_pp / (2.0 * g);
    let sxx = (spp - 2.0 * m * pair.d_xp) / (m * osc.omega_r()).powi(2);
    Ok(Matrix2::new(sxx, 0.0, 0.0, spp))
}

/// Equilibrium covariance from the static integrals:
/// `(Δx)² = (2γ0/πM) FI_1`, `(Δp)² = (2γ0M/π) FI_3`.
pub fn equilibrium_covariance(osc: &OscillatorSpec, bath: &BathSpec) -> Result<Matrix2<f64>> {
    osc.require_damping()?;
    let (fi1, fi3) = static_integrals(osc, bath)?;
    let (m, g) = (osc.mass(), osc.gamma0());
    Ok(Matrix2::new(2.0 * g / (PI * m) * fi1, 0.0, 0.0, 2.0 * g * m / PI * fi3))
}

/// Symmetric cumulant tensor over the two phase-space axes, stored densely
/// with entry `(i_1, …, i_n)` at bit pattern `Σ i_m 2^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantTensor {
    order: usize,
    data: Vec<f64>,
}

impl CumulantTensor {
    /// Builds a tensor from a function of the number of momentum indices,
    /// which determines a symmetric tensor uniquely.
    pub fn from_momentum_count(order: usize, f: impl Fn(usize) -> f64) -> Self {
        let data = (0..1usize << order).map(|i| f(i.count_ones() as usize)).collect();
        Self { order, data }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        let flat = index.iter().enumerate().fold(0, |acc, (m, &i)| acc | (i << m));
        self.data[flat]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Contracts every index with `a`: `κ'_{i…} = a_{ij} … κ_{j…}`.
    pub fn transform(&self, a: &Matrix2<f64>) -> Self {
        let mut data = self.data.clone();
        for axis in 0..self.order {
            let bit = 1 << axis;
            let mut next = vec![0.0; data.len()];
            for (flat, out) in next.iter_mut().enumerate() {
                let row = (flat & bit != 0) as usize;
                let base = flat & !bit;
                *out = a[(row, 0)] * data[base] + a[(row, 1)] * data[base | bit];
            }
            data = next;
        }
        Self {
            order: self.order,
            data,
        }
    }

    /// `Σ κ_{i…} k_i …`
    pub fn contract(&self, k: &Vector2<f64>) -> f64 {
        self.data
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                let prod: f64 = (0..self.order).map(|m| k[(flat >> m) & 1]).product();
                v * prod
            })
            .sum()
    }
}

/// An initial condition described by its cumulants.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierWignerState {
    pub mean: Vector2<f64>,
    pub covariance: Matrix2<f64>,
    higher: Vec<CumulantTensor>,
    max_order: usize,
}

impl FourierWignerState {
    pub fn gaussian(mean: Vector2<f64>, covariance: Matrix2<f64>) -> Result<Self> {
        if (covariance[(0, 1)] - covariance[(1, 0)]).abs() > 1e-12 * covariance.abs().max() {
            return Err(Error::InvalidParameter("covariance must be symmetric".into()));
        }
        Ok(Self {
            mean,
            covariance,
            higher: Vec::new(),
            max_order: DEFAULT_MAX_ORDER,
        })
    }

    /// Minimum-uncertainty Gaussian with position width `sqrt(sxx)`.
    pub fn coherent(mean: Vector2<f64>, sxx: f64) -> Result<Self> {
        Self::gaussian(mean, Matrix2::new(sxx, 0.0, 0.0, 0.25 / sxx))
    }

    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order.max(2);
        self
    }

    /// Adds a cumulant of order three or more, replacing any of equal order.
    pub fn with_cumulant(mut self, tensor: CumulantTensor) -> Result<Self> {
        if tensor.order < 3 || tensor.order > self.max_order {
            return Err(Error::InvalidParameter(format!(
                "cumulant order {} outside 3..={}",
                tensor.order, self.max_order
            )));
        }
        self.higher.retain(|c| c.order != tensor.order);
        self.higher.push(tensor);
        self.higher.sort_by_key(|c| c.order);
        Ok(self)
    }

    pub fn cumulant(&self, order: usize) -> Option<&CumulantTensor> {
        self.higher.iter().find(|c| c.order == order)
    }

    pub fn is_gaussian(&self) -> bool {
        self.higher.iter().all(|c| c.data.iter().all(|&x| x == 0.0))
    }

    pub fn determinant(&self) -> f64 {
        self.covariance.determinant()
    }

    /// `ln F(k)` with `F(k) = ⟨e^{−ik·q}⟩`, as `(real, imaginary)` parts.
    pub fn log_characteristic(&self, k: &Vector2<f64>) -> (f64, f64) {
        let mut re = -0.5 * (k.transpose() * self.covariance * k)[(0, 0)];
        let mut im = -k.dot(&self.mean);
        for c in &self.higher {
            let n = c.order;
            let value = c.contract(k) / (1..=n).map(|j| j as f64).product::<f64>();
            // (−i)^n cycles through 1, −i, −1, i.
            match n % 4 {
                0 => re += value,
                1 => im -= value,
                2 => re -= value,
                _ => im += value,
            }
        }
        (re, im)
    }

    /// Applies the linear phase-space map `q ↦ a q` to every cumulant.
    pub fn transformed(&self, a: &Matrix2<f64>) -> Self {
        Self {
            mean: a * self.mean,
            covariance: a * self.covariance * a.transpose(),
            higher: self.higher.iter().map(|c| c.transform(a)).collect(),
            max_order: self.max_order,
        }
    }
}

/// Complex value of the characteristic function as `(re, im)`.
pub type CharValue = (f64, f64);

fn check_time(t: f64, sigma_t: &ThermalCovariance) -> Result<()> {
    if (sigma_t.t - t).abs() > 1e-12 * t.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "thermal covariance is for t = {}, not {t}",
            sigma_t.t
        )));
    }
    Ok(())
}

/// Cumulants at time `t`: every tensor contracted with `U(t)`, and `σ_T(t)`
/// added to the covariance.
pub fn evolve_cumulants(
    state0: &FourierWignerState,
    t: f64,
    osc: &OscillatorSpec,
    sigma_t: &ThermalCovariance,
) -> Result<FourierWignerState> {
    check_time(t, sigma_t)?;
    let mut state = state0.transformed(&propagator(t, osc));
    state.covariance += sigma_t.sigma;
    Ok(state)
}

/// `F_t(k) = F_0(U(t)ᵀk) · exp(−½ kᵀσ_T(t)k)`.
pub fn characteristic_function(
    state0: &FourierWignerState,
    t: f64,
    k: &Vector2<f64>,
    osc: &OscillatorSpec,
    sigma_t: &ThermalCovariance,
) -> Result<CharValue> {
    check_time(t, sigma_t)?;
    let mapped = propagator(t, osc).transpose() * k;
    let (re, im) = state0.log_characteristic(&mapped);
    let birth = -0.5 * (k.transpose() * sigma_t.sigma * k)[(0, 0)];
    let modulus = (re + birth).exp();
    Ok((modulus * im.cos(), modulus * im.sin()))
}

/// Linear entropy `1 − ½ (det σ)^{−1/2}` of a Gaussian with covariance `σ`.
pub fn gaussian_linear_entropy(covariance: &Matrix2<f64>) -> Result<f64> {
    let det = covariance.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPhysicalState(det));
    }
    Ok(1.0 - 0.5 / det.sqrt())
}

/// Linear entropy `1 − Tr ρ² = 1 − (1/2π)∫|F_t(k)|² d²k` by quadrature in
/// polar coordinates of the covariance-whitened wavevector (radius ≤ 8).
pub fn linear_entropy_quadrature(
    state0: &FourierWignerState,
    t: f64,
    osc: &OscillatorSpec,
    sigma_t: &ThermalCovariance,
) -> Result<f64> {
    let evolved = evolve_cumulants(state0, t, osc, sigma_t)?;
    let det = evolved.determinant();
    if !(det > 0.0) {
        return Err(Error::NonPhysicalState(det));
    }
    // k = A u with Aᵀ σ A = I, A = σ^{-1/2}.
    let eig = SymmetricEigen::new(evolved.covariance);
    let inv_sqrt = eig.eigenvectors
        * Matrix2::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()))
        * eig.eigenvectors.transpose();
    let jacobian = inv_sqrt.determinant().abs();
    let settings = QuadSettings {
        rel_tol: 1e-11,
        abs_tol: 1e-15,
        ..QuadSettings::default()
    };
    let angular = |r: f64| -> Result<f64> {
        let q = integrate(
            |theta: f64| {
                let u = Vector2::new(r * theta.cos(), r * theta.sin());
                let (re, _) = evolved.log_characteristic(&(inv_sqrt * u));
                (2.0 * re).exp()
            },
            &partition(0.0, 2.0 * PI, &[], PI / 4.0),
            &settings,
        )?;
        Ok(q.value[0] * r)
    };
    let mut failure = None;
    let radial = integrate(
        |r| {
            angular(r).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                0.0
            })
        },
        &partition(0.0, 8.0, &[], 1.0),
        &settings,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    let purity = jacobian * radial.value[0] / (2.0 * PI);
    Ok(1.0 - purity)
}

/// Linear entropy at time `t`: closed form for Gaussian states, quadrature
/// otherwise.
pub fn linear_entropy(
    state0: &FourierWignerState,
    t: f64,
    osc: &OscillatorSpec,
    sigma_t: &ThermalCovariance,
) -> Result<f64> {
    if state0.is_gaussian() {
        gaussian_linear_entropy(&evolve_cumulants(state0, t, osc, sigma_t)?.covariance)
    } else {
        linear_entropy_quadrature(state0, t, osc, sigma_t)
    }
}

/// Unit-determinant momentum shear `W(x, p) ↦ W(x, p + shear·x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickTransform {
    pub shear: f64,
}

impl KickTransform {
    /// The induced map on phase-space points, `p ↦ p − shear·x`.
    pub fn matrix(&self) -> Matrix2<f64> {
        Matrix2::new(1.0, 0.0, -self.shear, 1.0)
    }
}

pub fn apply_kick(state0: &FourierWignerState, kick: &KickTransform) -> FourierWignerState {
    state0.transformed(&kick.matrix())
}
