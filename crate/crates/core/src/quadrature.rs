//! Globally adaptive 7/15-point Gauss–Kronrod integration.
//!
//! The integrand may be vector valued (`[f64; N]`); panels are refined in order
//! of their largest component error until the summed error meets the
//! requested tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 400_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<const N: usize> {
    pub value: [f64; N],
    pub error: f64,
    pub evaluations: usize,
}

struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: f64,
}

impl<const N: usize> PartialEq for Panel<N> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<const N: usize> Eq for Panel<N> {}
impl<const N: usize> PartialOrd for Panel<N> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<const N: usize> Ord for Panel<N> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<const N: usize, F>(f: &mut F, a: f64, b: f64) -> Panel<N>
where
    F: FnMut(f64) -> [f64; N],
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut res_k = [0.0; N];
    let mut res_g = [0.0; N];
    let mut res_abs = [0.0; N];
    let mut samples = [[[0.0; N]; 2]; 7];
    for i in 0..N {
        res_k[i] = fc[i] * WGK[7];
        res_g[i] = fc[i] * WG[3];
        res_abs[i] = fc[i].abs() * WGK[7];
    }
    for (j, pair) in samples.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        for i in 0..N {
            res_k[i] += WGK[j] * (f1[i] + f2[i]);
            res_abs[i] += WGK[j] * (f1[i].abs() + f2[i].abs());
            if j % 2 == 1 {
                res_g[i] += WG[j / 2] * (f1[i] + f2[i]);
            }
        }
        *pair = [f1, f2];
    }
    let mut value = [0.0; N];
    let mut error: f64 = 0.0;
    for i in 0..N {
        let mean = 0.5 * res_k[i];
        let mut res_asc = WGK[7] * (fc[i] - mean).abs();
        for (j, pair) in samples.iter().enumerate() {
            res_asc += WGK[j] * ((pair[0][i] - mean).abs() + (pair[1][i] - mean).abs());
        }
        let res_asc = res_asc * half.abs();
        let abs_i = res_abs[i] * half.abs();
        let mut err = ((res_k[i] - res_g[i]) * half).abs();
        if res_asc != 0.0 && err != 0.0 {
            err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
        }
        if abs_i > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            err = err.max(50.0 * f64::EPSILON * abs_i);
        }
        value[i] = res_k[i] * half;
        error = error.max(err);
    }
    Panel { a, b, value, error }
}

/// Sorted breakpoints covering `[a, b]`: the interior `splits` plus uniform
/// subdivision so that no panel is wider than `max_width`.
pub fn partition(a: f64, b: f64, splits: &[f64], max_width: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = splits
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut points = vec![a];
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        let pieces = if max_width.is_finite() && max_width > 0.0 {
            ((len / max_width).ceil() as usize).max(1)
        } else {
            1
        };
        for k in 1..pieces {
            points.push(w[0] + len * k as f64 / pieces as f64);
        }
        points.push(w[1]);
    }
    points
}

/// Integrates a vector-valued function over consecutive panels given by `points`.
pub fn integrate_vec<const N: usize, F>(mut f: F, points: &[f64], settings: &QuadSettings) -> Result<Quadrature<N>>
where
    F: FnMut(f64) -> [f64; N],
{
    if points.len() < 2 {
        return Ok(Quadrature {
            value: [0.0; N],
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut evaluations = 0;
    let mut total = [0.0; N];
    let mut total_err = 0.0;
    let mut frozen_err = 0.0;
    for w in points.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let p = kronrod(&mut f, w[0], w[1]);
        evaluations += 15;
        for (t, v) in total.iter_mut().zip(&p.value) {
            *t += v;
        }
        total_err += p.error;
        heap.push(p);
    }
    let tolerance = |v: &[f64; N]| {
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        settings.abs_tol.max(settings.rel_tol * scale)
    };
    let mut iterations = 0usize;
    while total_err + frozen_err > tolerance(&total) {
        if heap.len() >= settings.max_panels {
            return Err(Error::ToleranceNotMet {
                estimate: total[0],
                error_bound: total_err + frozen_err,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-14 * worst.a.abs().max(1e-300) {
            frozen_err += worst.error;
            total_err -= worst.error;
            heap.push(Panel { error: 0.0, ..worst });
            if heap.iter().all(|p| p.error == 0.0) {
                break;
            }
            continue;
        }
        let left = kronrod(&mut f, worst.a, mid);
        let right = kronrod(&mut f, mid, worst.b);
        evaluations += 30;
        for (i, t) in total.iter_mut().enumerate() {
            *t += left.value[i] + right.value[i] - worst.value[i];
        }
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        iterations += 1;
        if iterations % 256 == 0 {
            total_err = heap.iter().map(|p| p.error).sum();
        }
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = [0.0; N];
    let mut error = frozen_err;
    for p in &panels {
        for (v, pv) in value.iter_mut().zip(&p.value) {
            *v += pv;
        }
        error += p.error;
    }
    if error > tolerance(&value) {
        return Err(Error::ToleranceNotMet {
            estimate: value[0],
            error_bound: error,
        });
    }
    Ok(Quadrature {
        value,
        error,
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_vec`].
pub fn integrate<F>(mut f: F, points: &[f64], settings: &QuadSettings) -> Result<Quadrature<1>>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(move |x| [f(x)], points, settings)
}
