//! Experiment configuration files.
//!
//! ```toml
//! schema_version = 1
//! scenarios = ["S1", "S4"]
//! mode = "both"            # analytic | montecarlo | both
//! c1 = [0.1]
//! c2 = [0.1, 0.5]
//! alpha = 0.1
//! rho = 0.9
//! quantities = ["capacity_cdf", "blocking"]
//!
//! [params]                 # optional overrides; `_db` keys are converted once
//! omega_ps_db = 0.0
//!
//! [mc]
//! n_samples = 1000000
//! seed = 7
//!
//! [grid]
//! start = 0.0
//! stop = 8.0
//! points = 161
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cogcap::dist::linear_grid;
use cogcap::model::db_to_linear;
use cogcap::policy::S5Method;
use cogcap::{make_params_from_ratios, McConfig, ParamOverrides, ScenarioId, SystemParams};
use serde::{Deserialize, Serialize};

use crate::{io_err, CliError, Result};

/// Version of the CSV row layout and manifest format.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "COGCAP_OUT_DIR";

pub const DEFAULT_OUT_DIR: &str = "cogcap-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analytic,
    Montecarlo,
    Both,
}

impl Mode {
    pub fn analytic(self) -> bool {
        matches!(self, Self::Analytic | Self::Both)
    }

    pub fn montecarlo(self) -> bool {
        matches!(self, Self::Montecarlo | Self::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    CapacityCdf,
    CapacityPdf,
    Blocking,
    MeanCapacity,
    /// Transmit-power CDF (Monte Carlo only).
    PtCdf,
    /// Constraint satisfaction and max-power rates (Monte Carlo only).
    Constraint,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CapacityCdf => "capacity_cdf",
            Self::CapacityPdf => "capacity_pdf",
            Self::Blocking => "blocking",
            Self::MeanCapacity => "mean_capacity",
            Self::PtCdf => "pt_cdf",
            Self::Constraint => "constraint",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_streams")]
    pub stream_count: u32,
    #[serde(default = "default_s5_method")]
    pub s5_method: S5Method,
}

fn default_samples() -> u64 {
    1_000_000
}

fn default_streams() -> u32 {
    64
}

fn default_s5_method() -> S5Method {
    S5Method::Series
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            n_samples: default_samples(),
            seed: 0,
            stream_count: default_streams(),
            s5_method: default_s5_method(),
        }
    }
}

/// Evenly spaced capacity grid in bits/s/Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 8.0,
            points: 161,
        }
    }
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        linear_grid(self.start, self.stop, self.points)
    }

    fn validate(&self) -> Result<()> {
        if self.points < 2 || !(self.start >= 0.0) || !(self.stop > self.start) || !self.stop.is_finite() {
            return Err(CliError::Config(format!(
                "grid needs 0 <= start < stop and at least 2 points (got {self:?})"
            )));
        }
        Ok(())
    }
}

fn default_schema() -> u32 {
    SCHEMA_VERSION
}

fn default_ratio() -> Vec<f64> {
    vec![0.1]
}

fn default_alpha() -> f64 {
    cogcap::model::DEFAULT_ALPHA
}

fn default_rho() -> f64 {
    cogcap::model::DEFAULT_RHO
}

fn default_quantities() -> Vec<Quantity> {
    vec![Quantity::CapacityCdf, Quantity::Blocking]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema_version: u32,
    pub scenarios: Vec<ScenarioId>,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_ratio")]
    pub c1: Vec<f64>,
    #[serde(default = "default_ratio")]
    pub c2: Vec<f64>,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_quantities")]
    pub quantities: Vec<Quantity>,
    /// Overrides of individual system parameters, linear or `_db`.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub grid: GridSpec,
}

/// One fully resolved parameter point of an experiment, with the requested
/// ratios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedPoint {
    pub c1: f64,
    pub c2: f64,
    pub params: SystemParams,
}

const DB_CAPABLE: [&str; 9] = [
    "pp", "pm", "sigma2_p", "sigma2_s", "omega_p", "omega_s", "omega_ps", "omega_sp", "gamma_t",
];

/// Converts the `[params]` table to linear overrides.
pub fn resolve_overrides(params: &BTreeMap<String, f64>) -> Result<ParamOverrides> {
    let mut linear: BTreeMap<&str, f64> = BTreeMap::new();
    for (key, &value) in params {
        let (name, v) = match key.strip_suffix("_db") {
            Some(base) => (base, db_to_linear(value)),
            None => (key.as_str(), value),
        };
        if !DB_CAPABLE.contains(&name) {
            return Err(CliError::Config(format!("unknown parameter `{key}` in [params]")));
        }
        if linear.insert(name, v).is_some() {
            return Err(CliError::Config(format!(
                "parameter `{name}` given both linear and in dB"
            )));
        }
    }
    let get = |k: &str| linear.get(k).copied();
    Ok(ParamOverrides {
        pp: get("pp"),
        pm: get("pm"),
        sigma2_p: get("sigma2_p"),
        sigma2_s: get("sigma2_s"),
        omega_p: get("omega_p"),
        omega_s: get("omega_s"),
        omega_ps: get("omega_ps"),
        omega_sp: get("omega_sp"),
        gamma_t: get("gamma_t"),
        alpha: None,
        rho: None,
    })
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml(&text)
    }

    /// Checks the config and expands it into parameter points.
    pub fn resolve(&self) -> Result<Vec<ResolvedPoint>> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Schema(format!(
                "config schema_version {} but this tool writes {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.scenarios.is_empty() {
            return Err(CliError::Config("at least one scenario is required".into()));
        }
        if self.c1.is_empty() || self.c2.is_empty() {
            return Err(CliError::Config("c1 and c2 grids must be non-empty".into()));
        }
        if self.quantities.is_empty() {
            return Err(CliError::Config("at least one quantity is required".into()));
        }
        self.grid.validate()?;
        if self.mode == Mode::Montecarlo && self.quantities.contains(&Quantity::CapacityPdf) {
            return Err(CliError::Config("capacity_pdf is analytic only".into()));
        }
        if self.scenarios.contains(&ScenarioId::S5) && self.quantities.contains(&Quantity::CapacityPdf) {
            return Err(CliError::Config("capacity_pdf is not available for S5".into()));
        }
        if self.mode == Mode::Analytic
            && self
                .quantities
                .iter()
                .any(|q| matches!(q, Quantity::PtCdf | Quantity::Constraint))
        {
            return Err(CliError::Config(
                "pt_cdf and constraint need mode = \"montecarlo\" or \"both\"".into(),
            ));
        }
        if self.mode.montecarlo() || self.scenarios.contains(&ScenarioId::S5) {
            self.mc_config(ScenarioId::S1).validate()?;
        }
        let mut overrides = resolve_overrides(&self.params)?;
        overrides.alpha = Some(self.alpha);
        overrides.rho = Some(self.rho);
        let mut points = Vec::with_capacity(self.c1.len() * self.c2.len());
        for &c1 in &self.c1 {
            for &c2 in &self.c2 {
                let params = make_params_from_ratios(c1, c2, &overrides).map_err(cogcap::Error::from)?;
                points.push(ResolvedPoint { c1, c2, params });
            }
        }
        Ok(points)
    }

    pub fn mc_config(&self, scenario: ScenarioId) -> McConfig {
        McConfig {
            n_samples: self.mc.n_samples,
            seed: self.mc.seed,
            scenario,
            stream_count: self.mc.stream_count,
            s5_method: self.mc.s5_method,
            capacity_grid: self.grid.values(),
            power_points: 101,
        }
    }

    /// `output_dir` from the config, else the environment, else the default.
    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(default_output_dir)
    }
}

pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Parses `a:b:n` into `n` evenly spaced values on `[a, b]`.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::Config(format!("expected a:b:n, got `{spec}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() || (n > 1 && !(b > a)) {
        return Err(bad());
    }
    Ok(linear_grid(a, b, n))
}
