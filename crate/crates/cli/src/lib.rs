//! Experiment runner behind the `cogcap` binary: TOML configs, figure data,
//! CSV output with a sidecar manifest.

pub mod config;
pub mod experiment;
pub mod figures;
pub mod output;

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown figure `{0}` (expected fig2..fig8)")]
    UnknownFigure(String),
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Core(#[from] cogcap::Error),
}

impl CliError {
    /// Stable category for the error record.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) | Self::UnknownFigure(_) => "validation",
            Self::Schema(_) => "schema",
            Self::Io { .. } | Self::Csv(_) => "io",
            Self::Core(cogcap::Error::Model(_) | cogcap::Error::Invalid(_)) => "validation",
            Self::Core(_) => "numeric",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "validation" => 2,
            "schema" => 3,
            "numeric" => 4,
            _ => 1,
        }
    }

    /// Machine-readable TOML record of the failure.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: Body<'a>,
        }
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            exit_code: i32,
            message: String,
        }
        let rec = Record {
            error: Body {
                kind: self.kind(),
                exit_code: self.exit_code(),
                message: self.to_string(),
            },
        };
        toml::to_string(&rec).unwrap_or_else(|_| format!("[error]\nmessage = {:?}\n", self.to_string()))
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
