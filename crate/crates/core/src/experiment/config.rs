use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{IntegratorConfig, DEFAULT_SAMPLE_CADENCE};
use crate::lattice::LatticeParams;

/// Initial spectrum of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitKind {
    /// `ω_k |a_k|² = 1`.
    Thermal,
    /// `ω_k |a_k|² = 1 + ω_k²`.
    OutOfEquilibrium,
}

impl InitKind {
    pub const ALL: [InitKind; 2] = [InitKind::Thermal, InitKind::OutOfEquilibrium];

    pub fn as_str(self) -> &'static str {
        match self {
            InitKind::Thermal => "thermal",
            InitKind::OutOfEquilibrium => "out-of-equilibrium",
        }
    }

    /// Stable integer used in seed derivation.
    pub(crate) fn tag(self) -> u64 {
        match self {
            InitKind::Thermal => 0,
            InitKind::OutOfEquilibrium => 1,
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thermal" => Ok(InitKind::Thermal),
            "out-of-equilibrium" => Ok(InitKind::OutOfEquilibrium),
            other => Err(Error::Config(format!(
                "unknown initial condition {other:?} (expected thermal or out-of-equilibrium)"
            ))),
        }
    }
}

/// Desk-scale chain sizes.
pub const DEFAULT_SIZES: [usize; 2] = [200, 500];
/// The sizes of the full published sweep.
pub const FULL_SIZES: [usize; 4] = [200, 500, 800, 1000];
pub const DEFAULT_BETA_N: [f64; 5] = [1.0, 0.5, 0.1, 0.05, 0.01];

/// Declarative description of a sweep. Field names double as the TOML keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "N", default = "default_sizes", deserialize_with = "one_or_many")]
    pub n: Vec<usize>,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(rename = "betaN_values", default = "default_beta_n")]
    pub beta_n_values: Vec<f64>,
    #[serde(default = "default_init", deserialize_with = "one_or_many")]
    pub init: Vec<InitKind>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(rename = "t_max_in_Tf", default = "default_t_max")]
    pub t_max_in_tf: f64,
    #[serde(rename = "window_in_Tf", default = "default_window")]
    pub window_in_tf: [f64; 2],
    #[serde(default = "default_ensembles")]
    pub n_ensembles: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_cadence")]
    pub sample_cadence: usize,
}

fn one() -> f64 {
    1.0
}
fn default_sizes() -> Vec<usize> {
    DEFAULT_SIZES.to_vec()
}
fn default_beta_n() -> Vec<f64> {
    DEFAULT_BETA_N.to_vec()
}
fn default_init() -> Vec<InitKind> {
    InitKind::ALL.to_vec()
}
fn default_h() -> f64 {
    0.01
}
fn default_t_max() -> f64 {
    10.0
}
fn default_window() -> [f64; 2] {
    [5.0, 10.0]
}
fn default_ensembles() -> usize {
    5
}
fn default_cadence() -> usize {
    DEFAULT_SAMPLE_CADENCE
}

fn one_or_many<'de, D, T>(de: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(match OneOrMany::deserialize(de)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    })
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: default_sizes(),
            kappa: 1.0,
            m: 1.0,
            beta_n_values: default_beta_n(),
            init: default_init(),
            h: default_h(),
            t_max_in_tf: default_t_max(),
            window_in_tf: default_window(),
            n_ensembles: default_ensembles(),
            base_seed: 0,
            sample_cadence: default_cadence(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Self = toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.beta_n_values.is_empty() || self.init.is_empty() {
            return Err(Error::Config("N, betaN_values and init must be non-empty".into()));
        }
        for &n in &self.n {
            LatticeParams::new(n, self.m, self.kappa, 0.0)?;
        }
        if let Some(bad) = self.beta_n_values.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(Error::Config(format!("betaN values must be positive, got {bad}")));
        }
        IntegratorConfig::new(self.h, self.sample_cadence)?;
        let [lo, hi] = self.window_in_tf;
        if !(self.t_max_in_tf.is_finite() && self.t_max_in_tf > 0.0) {
            return Err(Error::Config(format!("t_max_in_Tf must be positive, got {}", self.t_max_in_tf)));
        }
        if !(0.0 <= lo && lo <= hi && hi <= self.t_max_in_tf) {
            return Err(Error::Config(format!(
                "averaging window [{lo}, {hi}] must lie inside [0, {}]",
                self.t_max_in_tf
            )));
        }
        if self.n_ensembles == 0 {
            return Err(Error::Config("n_ensembles must be at least 1".into()));
        }
        Ok(())
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::new(self.h, self.sample_cadence).expect("validated")
    }
}

/// Fundamental period `2π/ω(1)`.
pub fn fundamental_period(params: &LatticeParams) -> f64 {
    2.0 * std::f64::consts::PI / crate::spectral::dispersion(1, params)
}
