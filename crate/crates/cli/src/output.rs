//! CSV result files and the manifest written next to them.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cogcap::{ScenarioId, SystemParams};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SCHEMA_VERSION};
use crate::{io_err, CliError, Result};

pub const CSV_COLUMNS: [&str; 11] = [
    "scenario", "c1", "c2", "alpha", "rho", "kind", "x", "value", "method", "err", "seed",
];

pub const MANIFEST_FILE: &str = "manifest.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Analytic,
    Mc,
}

/// The `(c1, c2)` written in result rows: the requested ratios, or the
/// ratios of the final parameters when overrides moved them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Labels {
    pub c1: f64,
    pub c2: f64,
}

impl Labels {
    pub fn new(c1: f64, c2: f64, p: &SystemParams) -> Self {
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        Self {
            c1: if near(c1, p.c1()) { c1 } else { p.c1() },
            c2: if near(c2, p.c2()) { c2 } else { p.c2() },
        }
    }
}

/// One evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario: ScenarioId,
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
    pub rho: f64,
    pub kind: String,
    pub x: f64,
    pub value: f64,
    pub method: Method,
    pub err: Option<f64>,
    pub seed: Option<u64>,
}

impl ResultRow {
    pub fn new(
        scenario: ScenarioId,
        labels: Labels,
        p: &SystemParams,
        kind: &str,
        x: f64,
        value: f64,
        method: Method,
    ) -> Self {
        Self {
            scenario,
            c1: labels.c1,
            c2: labels.c2,
            alpha: p.alpha,
            rho: p.rho,
            kind: kind.to_string(),
            x,
            value,
            method,
            err: None,
            seed: None,
        }
    }

    pub fn with_err(mut self, err: f64) -> Self {
        self.err = Some(err);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// What produced a result directory; enough to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Invocation {
    Run {
        config: ExperimentConfig,
    },
    Figure {
        id: String,
        samples: u64,
        seed: u64,
    },
    Blocking {
        scenario: ScenarioId,
        c2_grid: String,
        c1: f64,
        alpha: f64,
        rho: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestPoint {
    pub scenario: ScenarioId,
    pub c1: f64,
    pub c2: f64,
    pub params: SystemParams,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub csv_columns: Vec<String>,
    pub files: Vec<String>,
    pub invocation: Invocation,
    pub points: Vec<ManifestPoint>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
    }
}

/// Rows grouped by output file, plus the parameter points they came from.
#[derive(Debug, Default, Clone)]
pub struct ResultSet {
    pub files: BTreeMap<String, Vec<ResultRow>>,
    pub points: Vec<ManifestPoint>,
}

impl ResultSet {
    /// Adds rows to `<scenario>_<quantity>.csv`.
    pub fn push(&mut self, scenario: ScenarioId, quantity: &str, rows: impl IntoIterator<Item = ResultRow>) {
        self.files
            .entry(format!("{scenario}_{quantity}.csv"))
            .or_default()
            .extend(rows);
    }

    pub fn note_point(&mut self, scenario: ScenarioId, labels: Labels, params: &SystemParams, seed: Option<u64>) {
        let point = ManifestPoint {
            scenario,
            c1: labels.c1,
            c2: labels.c2,
            params: *params,
            seed,
        };
        if !self.points.contains(&point) {
            self.points.push(point);
        }
    }

    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.files.values().flatten()
    }

    /// Writes every CSV and the manifest into `dir`.
    pub fn write(&self, dir: &Path, invocation: Invocation) -> Result<Manifest> {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        check_existing_schema(dir)?;
        for (name, rows) in &self.files {
            write_csv(&dir.join(name), rows)?;
        }
        let manifest = Manifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            csv_columns: CSV_COLUMNS.iter().map(|s| s.to_string()).collect(),
            files: self.files.keys().cloned().collect(),
            invocation,
            points: self.points.clone(),
        };
        let text = toml::to_string(&manifest)
            .map_err(|e| CliError::Config(format!("cannot serialise manifest: {e}")))?;
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, text).map_err(io_err(&path))?;
        Ok(manifest)
    }
}

/// Refuses to mix results of different schema versions in one directory.
fn check_existing_schema(dir: &Path) -> Result<()> {
    let path = dir.join(MANIFEST_FILE);
    if !path.exists() {
        return Ok(());
    }
    #[derive(Deserialize)]
    struct Version {
        schema_version: Option<u32>,
    }
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let v: Version = toml::from_str(&text)
        .map_err(|e| CliError::Schema(format!("{}: unreadable manifest ({})", path.display(), e.message())))?;
    match v.schema_version {
        Some(SCHEMA_VERSION) => Ok(()),
        other => Err(CliError::Schema(format!(
            "{} holds schema version {other:?}, refusing to mix with version {SCHEMA_VERSION}",
            dir.display()
        ))),
    }
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn write_csv_to<W: std::io::Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(io_err(PathBuf::from("<stdout>")))?;
    Ok(())
}

/// Reads a results CSV, checking its header against the current schema.
pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(CliError::Schema(format!(
            "{}: unexpected columns {header:?}",
            path.display()
        )));
    }
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}
