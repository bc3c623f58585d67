//! One function per subcommand, each turning a resolved [`Config`] into a
//! [`Series`].

use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use qbm_core::coefficients::{
    diffusion_at, diffusion_ccr, diffusion_extreme_t, diffusion_late, diffusion_late_subtracted, frequency_integrals,
    DiffusionPair, ExpansionControl, Method,
};
use qbm_core::force::{evolve_forced, forced_mean_shift, ForceProfile, DEFAULT_FORCE_TOL};
use qbm_core::parametric::{GeneralEvolution, OdeTolerance, TimeDependentDrift};
use qbm_core::quadrature::QuadSettings;
use qbm_core::wigner::{
    apply_kick, evolve_cumulants, gaussian_linear_entropy, stationary_covariance, thermal_covariance_with,
    CacheSettings, CachedDiffusion, ConstantDiffusion, DiffusionModel, FourierWignerState, KickTransform,
};
use qbm_core::{BathSpec, OscillatorSpec, RegimeWarning};
use rayon::prelude::*;

use crate::config::{Command, Config, DriftNoise, ForceKind, Quantity};
use crate::output::{read_table, Series};
use crate::{CliError, Context};

/// Result of one subcommand.
pub struct Outcome {
    pub series: Series,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Warnings(Vec<String>);

impl Warnings {
    fn add(&mut self, w: impl Into<String>) {
        let w = w.into();
        if !self.0.contains(&w) {
            self.0.push(w);
        }
    }

    fn extend(&mut self, ws: &[RegimeWarning]) {
        for w in ws {
            self.add(w.0.clone());
        }
    }
}

pub fn execute(command: Command, config: &Config, base_dir: &Path) -> Result<Outcome, CliError> {
    let mut warnings = Warnings::default();
    let series = match command {
        Command::Coeffs => coeffs(config, &mut warnings)?,
        Command::Evolve => evolve(config, None, &mut warnings)?,
        Command::Forced => {
            let profile = force_profile(config, base_dir)?;
            evolve(config, Some(&profile), &mut warnings)?
        }
        Command::Compare => compare(config, &mut warnings)?,
        Command::Sweep => sweep(config, &mut warnings)?,
        Command::Parametric => parametric(config, &mut warnings)?,
    };
    Ok(Outcome {
        series,
        warnings: warnings.0,
    })
}

/// Parameter errors are input errors, not numerical failures.
fn input<T>(r: qbm_core::Result<T>) -> Result<T, CliError> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

fn oscillator(config: &Config, gamma0: f64) -> Result<OscillatorSpec, CliError> {
    let o = &config.oscillator;
    input(OscillatorSpec::new(o.mass, o.omega_r, gamma0))
}

fn bath(
    config: &Config,
    temperature: f64,
    osc: &OscillatorSpec,
    warnings: &mut Warnings,
) -> Result<BathSpec, CliError> {
    let b = &config.bath;
    let bath = BathSpec {
        temperature,
        cutoff_uv: b.cutoff_uv,
        cutoff_ir: b.cutoff_ir,
        supraohmic: b.supraohmic.clone(),
        subohmic: b.subohmic.clone(),
    };
    warnings.extend(&input(bath.validate(osc))?);
    Ok(bath)
}

fn base_system(config: &Config, warnings: &mut Warnings) -> Result<(OscillatorSpec, BathSpec), CliError> {
    let osc = oscillator(config, config.oscillator.gamma0)?;
    let bath = bath(config, config.bath.temperature, &osc, warnings)?;
    Ok((osc, bath))
}

fn control(config: &Config) -> ExpansionControl {
    let c = &config.control;
    ExpansionControl {
        k_max: c.k_max,
        rel_tol: c.rel_tol,
        abs_tol: c.abs_tol,
        close_tail: c.close_tail,
    }
}

fn method(name: &str) -> Result<Method, CliError> {
    input(name.parse())
}

fn coeffs(config: &Config, warnings: &mut Warnings) -> Result<Series, CliError> {
    let (osc, bath) = base_system(config, warnings)?;
    let ctrl = control(config);
    let times = config.time.times()?;
    if times[0] <= 0.0 {
        return Err(CliError::Config("coefficients need times t > 0".into()));
    }
    let methods = config
        .coeffs
        .methods
        .iter()
        .map(|m| method(m))
        .collect::<Result<Vec<_>, _>>()?;
    let mut series = Series::new();
    series.push("t", times.clone());
    for m in methods {
        match config.coeffs.quantity {
            Quantity::Fc1 => {
                if !m.is_time_dependent() {
                    return Err(CliError::Config(format!("method '{m}' has no FC1(t)")));
                }
                let values = times
                    .iter()
                    .map(|&t| frequency_integrals(t, &osc, &bath, m, &ctrl).map(|fi| fi.fc1))
                    .collect::<qbm_core::Result<Vec<_>>>()
                    .during(format!("FC1 by method '{m}'"))?;
                series.push(format!("fc1_{m}"), values);
            }
            Quantity::Diffusion => {
                let mut d_xp = Vec::with_capacity(times.len());
                let mut d_pp = Vec::with_capacity(times.len());
                for &t in &times {
                    let pair = diffusion_at(t, &osc, &bath, m, &ctrl).during(format!("diffusion by method '{m}'"))?;
                    warnings.extend(&pair.warnings);
                    d_xp.push(pair.d_xp);
                    d_pp.push(pair.d_pp);
                }
                series.push(format!("d_xp_{m}"), d_xp);
                series.push(format!("d_pp_{m}"), d_pp);
            }
        }
    }
    Ok(series)
}

fn initial_state(config: &Config) -> Result<FourierWignerState, CliError> {
    let s = &config.state;
    let c = s.covariance;
    if c[0][1] != c[1][0] {
        return Err(CliError::Config("initial covariance must be symmetric".into()));
    }
    let state = input(FourierWignerState::gaussian(
        Vector2::new(s.mean[0], s.mean[1]),
        Matrix2::new(c[0][0], c[0][1], c[1][0], c[1][1]),
    ))?;
    Ok(if s.kick != 0.0 {
        apply_kick(&state, &KickTransform { shear: s.kick })
    } else {
        state
    })
}

fn diffusion_model(
    config: &Config,
    osc: &OscillatorSpec,
    bath: &BathSpec,
    horizon: f64,
    warnings: &mut Warnings,
) -> Result<Box<dyn DiffusionModel>, CliError> {
    let m = method(&config.state.method)?;
    let ctrl = control(config);
    if m.is_time_dependent() {
        let settings = CacheSettings {
            switch_on: config.state.switch_on,
            ..CacheSettings::default()
        };
        // Warnings are raised per evaluation; sample one to surface them.
        let probe = diffusion_at(horizon.max(1.0), osc, bath, m, &ctrl).during(format!("diffusion by method '{m}'"))?;
        warnings.extend(&probe.warnings);
        let cache = CachedDiffusion::build(osc, bath, m, &ctrl, horizon, &settings)
            .during(format!("tabulating diffusion by method '{m}'"))?;
        Ok(Box::new(cache))
    } else {
        let pair = diffusion_at(1.0, osc, bath, m, &ctrl).during(format!("diffusion by method '{m}'"))?;
        warnings.extend(&pair.warnings);
        Ok(Box::new(ConstantDiffusion::from(&pair)))
    }
}

fn force_profile(config: &Config, base_dir: &Path) -> Result<ForceProfile, CliError> {
    let f = &config.force;
    Ok(match f.kind {
        ForceKind::Constant => ForceProfile::Constant { amplitude: f.amplitude },
        ForceKind::Sinusoidal => ForceProfile::Sinusoidal {
            amplitude: f.amplitude,
            frequency: f.frequency,
            phase: f.phase,
        },
        ForceKind::Tabulated => {
            let table = f
                .table
                .as_ref()
                .ok_or_else(|| CliError::Config("tabulated force needs a 'table' path".into()))?;
            let (times, values) = read_table(&base_dir.join(table))?;
            input(ForceProfile::tabulated(times, values))?
        }
    })
}

fn sigma_settings() -> QuadSettings {
    QuadSettings {
        rel_tol: 1e-10,
        ..QuadSettings::default()
    }
}

fn evolve(config: &Config, force: Option<&ForceProfile>, warnings: &mut Warnings) -> Result<Series, CliError> {
    let (osc, bath) = base_system(config, warnings)?;
    let times = config.time.times()?;
    let state0 = initial_state(config)?;
    let horizon = *times.last().expect("grid has points");
    let model = diffusion_model(config, &osc, &bath, horizon, warnings)?;
    let settings = sigma_settings();

    let mut cols: [Vec<f64>; 8] = Default::default();
    for &t in &times {
        let sigma_t = thermal_covariance_with(t, &osc, model.as_ref(), &settings)
            .during(format!("thermal covariance at t = {t}"))?;
        let (state, shift) = match force {
            Some(profile) => (
                evolve_forced(&state0, t, profile, &osc, &sigma_t).during(format!("forced evolution at t = {t}"))?,
                forced_mean_shift(profile, t, &osc, DEFAULT_FORCE_TOL).during(format!("forced response at t = {t}"))?,
            ),
            None => (
                evolve_cumulants(&state0, t, &osc, &sigma_t).during(format!("evolution at t = {t}"))?,
                Vector2::zeros(),
            ),
        };
        let entropy = gaussian_linear_entropy(&state.covariance).unwrap_or_else(|_| {
            warnings.add(format!(
                "covariance is not positive definite at t = {t}; entropy left as NaN"
            ));
            f64::NAN
        });
        let row = [
            state.mean[0],
            state.mean[1],
            shift[0],
            shift[1],
            state.covariance[(0, 0)],
            state.covariance[(0, 1)],
            state.covariance[(1, 1)],
            entropy,
        ];
        for (c, v) in cols.iter_mut().zip(row) {
            c.push(v);
        }
    }
    let [mx, mp, sx, sp, cxx, cxp, cpp, entropy] = cols;
    let mut series = Series::new();
    series.push("t", times);
    series.push("mean_x", mx);
    series.push("mean_p", mp);
    if force.is_some() {
        series.push("shift_x", sx);
        series.push("shift_p", sp);
    }
    series.push("sigma_xx", cxx);
    series.push("sigma_xp", cxp);
    series.push("sigma_pp", cpp);
    series.push("linear_entropy", entropy);
    Ok(series)
}

/// `ΔxΔp` of the stationary state, NaN when it is not a valid covariance.
fn uncertainty(pair: &DiffusionPair, osc: &OscillatorSpec) -> Result<f64, CliError> {
    let s = stationary_covariance(pair, osc).during("stationary covariance")?;
    let product = s[(0, 0)] * s[(1, 1)];
    Ok(if s[(0, 0)] > 0.0 && s[(1, 1)] > 0.0 {
        product.sqrt()
    } else {
        f64::NAN
    })
}

fn compare(config: &Config, warnings: &mut Warnings) -> Result<Series, CliError> {
    let osc = oscillator(config, config.oscillator.gamma0)?;
    let temps = &config.compare.temperatures;
    let cutoffs = &config.compare.cutoffs;
    if temps.is_empty() || cutoffs.is_empty() {
        return Err(CliError::Config("compare needs temperatures and cutoffs".into()));
    }
    let mut series = Series::new();
    series.push("temperature", temps.clone());

    let reference = bath(config, temps[0], &osc, warnings)?.with_cutoff(cutoffs[0]);
    let mut ccr = Vec::new();
    let mut ccr_dxdp = Vec::new();
    let mut extreme = Vec::new();
    for &temp in temps {
        let b = reference.with_temperature(temp);
        let pair = diffusion_ccr(&osc, &b).during(format!("CCR coefficients at T = {temp}"))?;
        warnings.extend(&pair.warnings);
        ccr_dxdp.push(uncertainty(&pair, &osc)?);
        ccr.push(pair.d_pp);
        extreme.push(
            diffusion_extreme_t(&osc, &b)
                .during(format!("extreme-T coefficients at T = {temp}"))?
                .d_pp,
        );
    }
    series.push("d_pp_ccr", ccr);
    series.push("uncertainty_ccr", ccr_dxdp);
    series.push("d_pp_extreme_t", extreme);

    for &cutoff in cutoffs {
        let label = format!("{cutoff:e}");
        let mut cols: [Vec<f64>; 4] = Default::default();
        for &temp in temps {
            let b = bath(config, temp, &osc, warnings)?.with_cutoff(cutoff);
            let late =
                diffusion_late(&osc, &b).during(format!("late-time coefficients at T = {temp}, cutoff {cutoff}"))?;
            warnings.extend(&late.warnings);
            let sub = diffusion_late_subtracted(&osc, &b).during(format!("subtracted coefficients at T = {temp}"))?;
            cols[0].push(late.d_xp);
            cols[1].push(late.d_pp);
            cols[2].push(uncertainty(&late, &osc)?);
            cols[3].push(uncertainty(&sub, &osc)?);
        }
        let [dxp, dpp, u, us] = cols;
        series.push(format!("d_xp_late_{label}"), dxp);
        series.push(format!("d_pp_late_{label}"), dpp);
        series.push(format!("uncertainty_late_{label}"), u);
        series.push(format!("uncertainty_subtracted_{label}"), us);
    }
    Ok(series)
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("QBM_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("QBM_THREADS must be a non-negative integer, got '{v}'")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker threads: {e}")))
}

fn sweep(config: &Config, warnings: &mut Warnings) -> Result<Series, CliError> {
    let s = &config.sweep;
    let m = method(&s.method)?;
    let ctrl = control(config);
    let grid: Vec<(f64, f64)> = s
        .gammas
        .iter()
        .flat_map(|&g| s.temperatures.iter().map(move |&t| (g, t)))
        .collect();
    let mut setups = Vec::with_capacity(grid.len());
    for &(g, temp) in &grid {
        let osc = oscillator(config, g)?;
        let b = bath(config, temp, &osc, warnings)?;
        setups.push((osc, b));
    }
    let pool = thread_pool()?;
    // Each point is computed independently and collected in grid order.
    let rows: Vec<Result<(DiffusionPair, Matrix2<f64>), CliError>> = pool.install(|| {
        setups
            .par_iter()
            .map(|(osc, b)| {
                let op = || format!("sweep point gamma0 = {}, T = {}", osc.gamma0(), b.temperature);
                let pair = diffusion_at(s.at_time, osc, b, m, &ctrl).during(op())?;
                let sigma = stationary_covariance(&pair, osc).during(op())?;
                Ok((pair, sigma))
            })
            .collect()
    });
    let mut cols: [Vec<f64>; 7] = Default::default();
    for (&(g, temp), row) in grid.iter().zip(rows) {
        let (pair, sigma) = row?;
        warnings.extend(&pair.warnings);
        let values = [
            g,
            temp,
            pair.d_xp,
            pair.d_pp,
            sigma[(0, 0)],
            sigma[(1, 1)],
            sigma.determinant(),
        ];
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v);
        }
    }
    let mut series = Series::new();
    let names = [
        "gamma0",
        "temperature",
        "d_xp",
        "d_pp",
        "sigma_xx",
        "sigma_pp",
        "det_sigma",
    ];
    for (name, col) in names.into_iter().zip(cols) {
        series.push(name, col);
    }
    Ok(series)
}

fn parametric(config: &Config, warnings: &mut Warnings) -> Result<Series, CliError> {
    let d = &config.drift;
    let (osc, bath) = base_system(config, warnings)?;
    let drift = input(TimeDependentDrift::new(
        config.oscillator.mass,
        (&d.gamma).into(),
        (&d.omega2).into(),
    ))?;
    let noise = match d.noise {
        DriftNoise::Late => {
            let pair = diffusion_late(&osc, &bath).during("late-time coefficients")?;
            warnings.extend(&pair.warnings);
            ConstantDiffusion::from(&pair)
        }
        DriftNoise::None => ConstantDiffusion { d_xp: 0.0, d_pp: 0.0 },
    };
    let times = config.time.times()?;
    let horizon = *times.last().expect("grid has points");
    let tol = OdeTolerance {
        rel: d.rel_tol,
        abs: d.abs_tol,
    };
    let evolution = GeneralEvolution::new(&drift, &noise, horizon, &tol).during("transition matrix")?;
    let state0 = initial_state(config)?;

    let mut cols: [Vec<f64>; 10] = Default::default();
    for &t in &times {
        let op = || format!("parametric evolution at t = {t}");
        let phi = evolution.transition().phi(t).during(op())?;
        let state = evolution.state(&state0, t).during(op())?;
        let values = [
            phi[(0, 0)],
            phi[(0, 1)],
            phi[(1, 0)],
            phi[(1, 1)],
            phi.determinant(),
            state.mean[0],
            state.mean[1],
            state.covariance[(0, 0)],
            state.covariance[(0, 1)],
            state.covariance[(1, 1)],
        ];
        for (c, v) in cols.iter_mut().zip(values) {
            c.push(v);
        }
    }
    let mut series = Series::new();
    series.push("t", times);
    let names = [
        "phi_xx", "phi_xp", "phi_px", "phi_pp", "det_phi", "mean_x", "mean_p", "sigma_xx", "sigma_xp", "sigma_pp",
    ];
    for (name, col) in names.into_iter().zip(cols) {
        series.push(name, col);
    }
    Ok(series)
}
