//! Shared fixtures for the benchmark suite.

use mcmc_core::{EnvParams, QuadratureSpec};

/// Slow transmitter, static receiver, fast signaling molecules.
pub fn reference_env() -> EnvParams {
    EnvParams::new(1e-14, 0.0, 8e-11, 1e-7, 1e-6, 1e-5).unwrap()
}

pub fn default_quad() -> QuadratureSpec {
    QuadratureSpec::default()
}
