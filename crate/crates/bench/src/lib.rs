//! Shared fixtures for the benchmarks: the default parameter regime.

use qbm_core::{BathSpec, OscillatorSpec};

pub fn default_oscillator() -> OscillatorSpec {
    OscillatorSpec::new(1.0, 1.0, 0.3).expect("valid default oscillator")
}

pub fn default_bath(temperature: f64) -> BathSpec {
    BathSpec::ohmic(temperature, 1e3)
}
