use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cogcap::ScenarioId;
use cogcap_cli::config::{default_output_dir, parse_range, ExperimentConfig, Mode, Quantity, OUT_DIR_ENV};
use cogcap_cli::experiment::{evaluate, run_experiment};
use cogcap_cli::figures::{reproduce_figure, FigureId};
use cogcap_cli::output::{write_csv_to, Invocation, Manifest, MANIFEST_FILE};
use cogcap_cli::{CliError, Result};

#[derive(Parser)]
#[command(name = "cogcap", version, about = "SU capacity and blocking under limited channel knowledge")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (or replay a manifest).
    Run {
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data series of one figure (fig2..fig8).
    Figure {
        id: String,
        #[arg(long, env = OUT_DIR_ENV)]
        out: Option<PathBuf>,
        /// Monte Carlo draws per series.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Blocking probability over a c2 grid, as CSV on stdout.
    Blocking {
        #[arg(long)]
        scenario: ScenarioId,
        /// `start:stop:count`
        #[arg(long)]
        c2_grid: String,
        #[arg(long, default_value_t = 0.1)]
        c1: f64,
        #[arg(long, default_value_t = cogcap::model::DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = cogcap::model::DEFAULT_RHO)]
        rho: f64,
        /// Also write the CSV and a manifest into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn figure(id: &str, out: Option<PathBuf>, samples: u64, seed: u64) -> Result<PathBuf> {
    let fig: FigureId = id.parse()?;
    let dir = out.unwrap_or_else(default_output_dir).join(fig.as_str());
    let set = reproduce_figure(fig, samples, seed)?;
    set.write(
        &dir,
        Invocation::Figure {
            id: fig.as_str().to_string(),
            samples,
            seed,
        },
    )?;
    Ok(dir)
}

fn blocking(
    scenario: ScenarioId,
    c2_grid: &str,
    c1: f64,
    alpha: f64,
    rho: f64,
    out: Option<&Path>,
) -> Result<()> {
    let config = ExperimentConfig {
        scenarios: vec![scenario],
        mode: Mode::Analytic,
        c1: vec![c1],
        c2: parse_range(c2_grid)?,
        alpha,
        rho,
        quantities: vec![Quantity::Blocking],
        ..ExperimentConfig::from_toml("scenarios = [\"S1\"]")?
    };
    let set = evaluate(&config)?;
    let rows: Vec<_> = set.rows().cloned().collect();
    write_csv_to(std::io::stdout().lock(), &rows)?;
    if let Some(dir) = out {
        set.write(
            dir,
            Invocation::Blocking {
                scenario,
                c2_grid: c2_grid.to_string(),
                c1,
                alpha,
                rho,
            },
        )?;
    }
    Ok(())
}

/// Loads a config, or the invocation stored in a manifest.
fn load_run_target(path: &Path) -> Result<Invocation> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let is_manifest = path.file_name().is_some_and(|n| n == MANIFEST_FILE) || text.contains("[invocation]");
    if is_manifest {
        return Ok(Manifest::load(path)?.invocation);
    }
    Ok(Invocation::Run {
        config: ExperimentConfig::from_toml(&text)?,
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => match load_run_target(&config)? {
            Invocation::Run { config } => {
                let dir = out.unwrap_or_else(|| config.output_dir());
                let manifest = run_experiment(&config, &dir)?;
                println!("wrote {} files to {}", manifest.files.len(), dir.display());
            }
            Invocation::Figure { id, samples, seed } => {
                let dir = figure(&id, out, samples, seed)?;
                println!("wrote {}", dir.display());
            }
            Invocation::Blocking {
                scenario,
                c2_grid,
                c1,
                alpha,
                rho,
            } => blocking(scenario, &c2_grid, c1, alpha, rho, out.as_deref())?,
        },
        Command::Figure {
            id,
            out,
            samples,
            seed,
        } => {
            let dir = figure(&id, out, samples, seed)?;
            println!("wrote {}", dir.display());
        }
        Command::Blocking {
            scenario,
            c2_grid,
            c1,
            alpha,
            rho,
            out,
        } => blocking(scenario, &c2_grid, c1, alpha, rho, out.as_deref())?,
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let points = cfg.resolve()?;
            println!(
                "ok: {} scenario(s) x {} point(s), mode {:?}",
                cfg.scenarios.len(),
                points.len(),
                cfg.mode
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
