//! Flat experiment configuration, read from TOML.
//!
//! Every key is optional. Units: couplings are dimensionless (`g`), times are
//! `w t`, energies are `hbar w`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use rabi_quench::scaling::{log_grid, TableId, TableSpec};
use rabi_quench::{
    AveragingScheme, DisorderChannel, DisorderModel, IntegratorConfig, QuenchSpec, StepMode,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKey {
    Time,
    Param,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingKey {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Final coupling of the ramp, in [0, 1].
    pub g_final: f64,
    /// Ordered ramp duration `w tau` for `simulate`.
    pub omega_tau: f64,

    pub channel: ChannelKey,
    /// Disorder dispersion; `0` is the ordered ramp.
    pub sigma: f64,
    pub averaging: AveragingKey,
    /// Gauss-Legendre nodes (quadrature averaging).
    pub n_nodes: usize,
    /// Draws per grid point (Monte Carlo averaging).
    pub n_samples: usize,
    pub seed: u64,

    pub step_mode: StepMode,
    /// Step in `1/w`.
    pub omega_dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub constraint_tol: f64,

    /// Log-spaced `w tau` grid for `ensemble` and `predict`.
    pub grid_min: f64,
    pub grid_max: f64,
    pub points_per_decade: usize,
    /// Fit window for `fit`; defaults to the grid range.
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,

    /// Table overrides; the standard values are used when absent.
    pub sigma_list: Option<Vec<f64>>,
    pub windows: Option<Vec<[f64; 2]>>,

    /// CSV read by `fit` (columns `omega_tau` and `mean_Er`).
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub cache: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let cfg = IntegratorConfig::default();
        Self {
            g_final: 1.0,
            omega_tau: 1e3,
            channel: ChannelKey::Time,
            sigma: 0.0,
            averaging: AveragingKey::Quadrature,
            n_nodes: 33,
            n_samples: 1000,
            seed: 0,
            step_mode: cfg.step_mode,
            omega_dt: cfg.omega_dt,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            constraint_tol: cfg.constraint_tol,
            grid_min: 1e3,
            grid_max: 1e4,
            points_per_decade: 8,
            fit_min: None,
            fit_max: None,
            sigma_list: None,
            windows: None,
            input: None,
            output_dir: PathBuf::from("out"),
            cache: true,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn quench(&self) -> Result<QuenchSpec, CliError> {
        Ok(QuenchSpec::new(self.g_final, self.omega_tau)?)
    }

    pub fn model(&self) -> Result<DisorderModel, CliError> {
        let channel = match self.channel {
            ChannelKey::Time => DisorderChannel::Time,
            ChannelKey::Param => DisorderChannel::Param,
        };
        Ok(DisorderModel::new(channel, self.sigma)?)
    }

    pub fn scheme(&self) -> Result<AveragingScheme, CliError> {
        let scheme = match self.averaging {
            AveragingKey::Quadrature => AveragingScheme::Quadrature {
                n_nodes: self.n_nodes,
            },
            AveragingKey::MonteCarlo => AveragingScheme::MonteCarlo {
                n_samples: self.n_samples,
                seed: self.seed,
            },
        };
        scheme.validate()?;
        Ok(scheme)
    }

    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        let cfg = IntegratorConfig {
            step_mode: self.step_mode,
            omega_dt: self.omega_dt,
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            constraint_tol: self.constraint_tol,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if !(self.grid_min > 0.0 && self.grid_min <= self.grid_max) {
            return Err(CliError::Config(format!(
                "grid_min must be positive and not above grid_max, got [{}, {}]",
                self.grid_min, self.grid_max
            )));
        }
        if self.points_per_decade == 0 {
            return Err(CliError::Config("points_per_decade must be positive".into()));
        }
        if self.grid_min == self.grid_max {
            return Ok(vec![self.grid_min]);
        }
        Ok(log_grid(self.grid_min, self.grid_max, self.points_per_decade))
    }

    pub fn fit_window(&self) -> (f64, f64) {
        (
            self.fit_min.unwrap_or(self.grid_min),
            self.fit_max.unwrap_or(self.grid_max),
        )
    }

    pub fn table(&self, id: TableId) -> Result<TableSpec, CliError> {
        let mut spec = TableSpec::standard(id);
        if let Some(s) = &self.sigma_list {
            spec.sigma_list = s.clone();
        }
        if let Some(w) = &self.windows {
            spec.windows = w.iter().map(|w| (w[0], w[1])).collect();
        }
        spec.points_per_decade = self.points_per_decade;
        spec.scheme = self.scheme()?;
        spec.cfg = self.integrator()?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Everything that can change a computed number. Paths and the cache switch
/// are left out.
#[derive(Serialize)]
struct PhysicsKey<'a> {
    command: &'a str,
    g_final: f64,
    omega_tau: f64,
    channel: ChannelKey,
    sigma: f64,
    averaging: AveragingKey,
    n_nodes: usize,
    n_samples: usize,
    seed: u64,
    step_mode: StepMode,
    omega_dt: f64,
    rel_tol: f64,
    abs_tol: f64,
    constraint_tol: f64,
    grid_min: f64,
    grid_max: f64,
    points_per_decade: usize,
    fit_min: Option<f64>,
    fit_max: Option<f64>,
    sigma_list: &'a Option<Vec<f64>>,
    windows: &'a Option<Vec<[f64; 2]>>,
}

/// SHA-256 hex digest of the physics fields and the command name.
pub fn cache_key(config: &ExperimentConfig, command: &str) -> String {
    let key = PhysicsKey {
        command,
        g_final: config.g_final,
        omega_tau: config.omega_tau,
        channel: config.channel,
        sigma: config.sigma,
        averaging: config.averaging,
        n_nodes: config.n_nodes,
        n_samples: config.n_samples,
        seed: config.seed,
        step_mode: config.step_mode,
        omega_dt: config.omega_dt,
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        constraint_tol: config.constraint_tol,
        grid_min: config.grid_min,
        grid_max: config.grid_max,
        points_per_decade: config.points_per_decade,
        fit_min: config.fit_min,
        fit_max: config.fit_max,
        sigma_list: &config.sigma_list,
        windows: &config.windows,
    };
    let canonical = serde_json::to_vec(&key).expect("key serializes");
    hex::encode(Sha256::digest(&canonical))
}
