//! Scenario files: TOML with one table per parameter block.
//!
//! Every field has a default mirroring the reference regime
//! (`M = Ω_r = 1`, `γ0 = 0.3`, `Λ = 10³`, `T = 1`), so a scenario only has to
//! state what it changes. The resolved configuration, defaults included, is
//! written next to each output as a provenance record.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Coeffs,
    Evolve,
    Compare,
    Sweep,
    Forced,
    Parametric,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Coeffs => "coeffs",
            Command::Evolve => "evolve",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
            Command::Forced => "forced",
            Command::Parametric => "parametric",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub command: Option<Command>,
    /// Output file name, relative to the output directory.
    pub output: Option<String>,
    pub oscillator: OscillatorConfig,
    pub bath: BathConfig,
    pub time: TimeGrid,
    pub control: ControlConfig,
    pub coeffs: CoeffsConfig,
    pub state: StateConfig,
    pub compare: CompareConfig,
    pub sweep: SweepConfig,
    pub force: ForceConfig,
    pub drift: DriftConfig,
}

impl FromStr for Config {
    type Err = CliError;
    fn from_str(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.time.times()?;
        Ok(config)
    }
}

impl Config {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable as TOML")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillatorConfig {
    pub mass: f64,
    pub omega_r: f64,
    pub gamma0: f64,
}

impl Default for OscillatorConfig {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega_r: 1.0,
            gamma0: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathConfig {
    pub temperature: f64,
    pub cutoff_uv: f64,
    pub cutoff_ir: f64,
    /// `γ_1, γ_2, …` of the `(ω/Λ)^n` corrections.
    pub supraohmic: Vec<f64>,
    /// `φ_0, φ_1, …` of the `(λ/ω)^{n+1}` corrections.
    pub subohmic: Vec<f64>,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            cutoff_uv: 1e3,
            cutoff_ir: 0.0,
            supraohmic: Vec::new(),
            subohmic: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start: 0.5,
            end: 20.0,
            points: 40,
            spacing: Spacing::Linear,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        if self.points < 2 {
            return Err(CliError::Config("time grid needs at least two points".into()));
        }
        if !(self.start.is_finite() && self.end.is_finite() && self.end > self.start && self.start >= 0.0) {
            return Err(CliError::Config(format!(
                "time grid must satisfy 0 <= start < end, got [{}, {}]",
                self.start, self.end
            )));
        }
        let n = self.points - 1;
        let times: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..=n)
                .map(|i| self.start + (self.end - self.start) * i as f64 / n as f64)
                .collect(),
            Spacing::Log => {
                if self.start <= 0.0 {
                    return Err(CliError::Config("logarithmic time grid needs start > 0".into()));
                }
                let (a, b) = (self.start.ln(), self.end.ln());
                (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
            }
        };
        if times
            .windows(2)
            .any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater))
        {
            return Err(CliError::Config("time grid is not strictly increasing".into()));
        }
        Ok(times)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub k_max: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub close_tail: bool,
}

impl Default for ControlConfig {
    fn default() -> Self {
        let c = qbm_core::coefficients::ExpansionControl::default();
        Self {
            k_max: c.k_max,
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            close_tail: c.close_tail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Fc1,
    Diffusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoeffsConfig {
    pub methods: Vec<String>,
    pub quantity: Quantity,
}

impl Default for CoeffsConfig {
    fn default() -> Self {
        Self {
            methods: ["oracle", "low_t", "high_t", "general"].map(String::from).to_vec(),
            quantity: Quantity::Fc1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StateConfig {
    pub mean: [f64; 2],
    /// Row-major `[[σ_xx, σ_xp], [σ_px, σ_pp]]`.
    pub covariance: [[f64; 2]; 2],
    /// Route for the diffusion coefficients entering `σ_T`.
    pub method: String,
    /// Momentum shear applied to the initial state.
    pub kick: f64,
    /// Coefficients vanish before this time; defaults to `10/Λ`.
    pub switch_on: Option<f64>,
}

impl Default for StateConfig {
    fn default() -> Self {
        Self {
            mean: [2.0, 0.0],
            covariance: [[0.5, 0.0], [0.0, 0.5]],
            method: "high_t".into(),
            kick: 0.0,
            switch_on: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareConfig {
    pub temperatures: Vec<f64>,
    pub cutoffs: Vec<f64>,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            temperatures: vec![0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0],
            cutoffs: vec![1e3, 1e9],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub gammas: Vec<f64>,
    pub temperatures: Vec<f64>,
    pub method: String,
    /// Time at which time-dependent methods are evaluated.
    pub at_time: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            gammas: vec![0.05, 0.3, 0.8, 2.0],
            temperatures: vec![0.1, 1.0, 10.0],
            method: "late".into(),
            at_time: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceKind {
    Constant,
    Sinusoidal,
    Tabulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForceConfig {
    pub kind: ForceKind,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    /// Two-column `(t, F)` CSV, relative to the config file's directory.
    pub table: Option<String>,
}

impl Default for ForceConfig {
    fn default() -> Self {
        Self {
            kind: ForceKind::Sinusoidal,
            amplitude: 0.5,
            frequency: 0.8,
            phase: 0.0,
            table: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileConfig {
    Constant {
        value: f64,
    },
    Sinusoidal {
        mean: f64,
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    SmoothStep {
        from: f64,
        to: f64,
        center: f64,
        width: f64,
    },
}

impl From<&ProfileConfig> for qbm_core::parametric::Profile {
    fn from(p: &ProfileConfig) -> Self {
        use qbm_core::parametric::Profile;
        match *p {
            ProfileConfig::Constant { value } => Profile::Constant { value },
            ProfileConfig::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            } => Profile::Sinusoidal {
                mean,
                amplitude,
                frequency,
                phase,
            },
            ProfileConfig::SmoothStep {
                from,
                to,
                center,
                width,
            } => Profile::SmoothStep {
                from,
                to,
                center,
                width,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftNoise {
    /// Constant late-time coefficients of the configured bath.
    Late,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriftConfig {
    pub gamma: ProfileConfig,
    pub omega2: ProfileConfig,
    pub noise: DriftNoise,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            gamma: ProfileConfig::Sinusoidal {
                mean: 0.3,
                amplitude: 0.1,
                frequency: 1.0,
                phase: 0.0,
            },
            omega2: ProfileConfig::Constant { value: 1.0 },
            noise: DriftNoise::Late,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
        }
    }
}
