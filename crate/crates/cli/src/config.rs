//! TOML configuration schema. Every physical key carries its unit in the
//! name; a mismatch between intended and actual units is the most common
//! failure in this domain, so the file format makes units impossible to
//! overlook.

use std::path::Path;

use serde::Deserialize;

use mcmc_core::sim::SimMode;
use mcmc_core::{EnvParams, QuadratureSpec};

use crate::AppError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvConfig {
    #[serde(rename = "D_Tx_m2_per_s")]
    pub d_tx: f64,
    #[serde(rename = "D_Rx_m2_per_s")]
    pub d_rx: f64,
    #[serde(rename = "D_X_m2_per_s")]
    pub d_x: f64,
    #[serde(rename = "a_Tx_m")]
    pub a_tx: f64,
    #[serde(rename = "a_Rx_m")]
    pub a_rx: f64,
    #[serde(rename = "r0_m")]
    pub r0: f64,
}

impl EnvConfig {
    pub fn build(&self) -> Result<EnvParams, AppError> {
        EnvParams::new(self.d_tx, self.d_rx, self.d_x, self.a_tx, self.a_rx, self.r0)
            .map_err(|e| AppError::Config(format!("[env]: {e}")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub truncation_sigma: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        let d = QuadratureSpec::default();
        Self {
            abs_tol: d.abs_tol,
            rel_tol: d.rel_tol,
            max_subdivisions: d.max_subdivisions,
            truncation_sigma: d.truncation_sigma,
        }
    }
}

impl QuadConfig {
    pub fn build(&self) -> Result<QuadratureSpec, AppError> {
        let spec = QuadratureSpec {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            truncation_sigma: self.truncation_sigma,
        };
        spec.validate()
            .map_err(|e| AppError::Config(format!("[quadrature]: {e}")))?;
        Ok(spec)
    }
}

/// Uniform grid description: `points` values from `start` to `stop`
/// inclusive (a single point collapses to `start`).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GridConfig {
    pub fn build(&self, what: &str) -> Result<Vec<f64>, AppError> {
        if self.points == 0 {
            return Err(AppError::Config(format!("{what}: points must be >= 1")));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        if !(self.stop > self.start) {
            return Err(AppError::Config(format!("{what}: stop must exceed start")));
        }
        let n = self.points;
        Ok((0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelStatsConfig {
    /// Elapsed times at which moments and distributions are tabulated.
    pub t_list_s: Vec<f64>,
    pub tau_grid_s: GridConfig,
    /// Delay at which the response distribution is tabulated.
    pub dist_tau_s: f64,
    /// Number of interior points on (0, peak response) for the pdf/cdf table.
    pub h_points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub t_s: f64,
    pub tau_grid_s: GridConfig,
    pub step_s: f64,
    pub realizations: usize,
    /// "gaussian" (exact displacement draws) or "particle" (stepped walk).
    pub mode: String,
    #[serde(default)]
    pub dump_trajectory: bool,
}

impl SimulateConfig {
    pub fn mode(&self) -> Result<SimMode, AppError> {
        match self.mode.as_str() {
            "gaussian" => Ok(SimMode::GaussianDisplacement),
            "particle" => Ok(SimMode::ParticleWithReflection),
            other => Err(AppError::Config(format!(
                "[simulate] mode: expected \"gaussian\" or \"particle\", got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrugConfig {
    /// Release window T, s.
    pub window_s: f64,
    /// Constraint window, s.
    pub constraint_window_s: f64,
    /// Number of release instants I.
    pub releases: usize,
    /// Number of constraint instants N.
    pub constraints: usize,
    /// Deviation weight in the mean - beta * std constraint.
    pub beta: f64,
    /// Constant target rate, 1/s.
    pub theta_per_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrugEvalConfig {
    pub t_grid_s: GridConfig,
    #[serde(default = "default_grid_resolution")]
    pub grid_resolution: usize,
    /// Schedule CSV (release_time_s,alpha). When absent the schedule is
    /// designed from the [drug] section first.
    #[serde(default)]
    pub profile_csv: Option<String>,
}

fn default_grid_resolution() -> usize {
    4096
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub bits: usize,
    #[serde(rename = "T_b_s")]
    pub t_b_s: f64,
    pub eta: f64,
    pub budget: f64,
    pub psi: f64,
    pub confidence: f64,
    #[serde(default = "default_horizon")]
    pub horizon_s: f64,
    /// Extra efficiency floors for the curve table (the configured psi is
    /// always included).
    #[serde(default)]
    pub psi_list: Vec<f64>,
    #[serde(default = "default_frame_points")]
    pub frame_points: usize,
}

fn default_horizon() -> f64 {
    1e5
}

fn default_frame_points() -> usize {
    40
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub env: EnvConfig,
    #[serde(default)]
    pub quadrature: QuadConfig,
    pub channel_stats: Option<ChannelStatsConfig>,
    pub simulate: Option<SimulateConfig>,
    pub drug: Option<DrugConfig>,
    pub drug_eval: Option<DrugEvalConfig>,
    pub link: Option<LinkConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            AppError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| {
            AppError::Config(format!("{}: {e}", path.display()))
        })
    }

    pub fn require<'a, T>(section: &'a Option<T>, name: &str) -> Result<&'a T, AppError> {
        section
            .as_ref()
            .ok_or_else(|| AppError::Config(format!("missing [{name}] section")))
    }
}
