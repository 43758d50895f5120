//! Evaluation of configured experiments into result rows.
//!
//! Scalar quantities (blocking, mean capacity, rates, KS statistics) put the
//! swept ratio in the `x` column: `c2` for experiments, the figure's
//! horizontal axis for figures.

use std::path::Path;

use cogcap::dist::{self, DistributionCurve};
use cogcap::mc::{self, McSummary};
use cogcap::{McConfig, ScenarioId, SystemParams};

use crate::config::{ExperimentConfig, Mode, Quantity};
use crate::output::{Invocation, Labels, Manifest, Method, ResultRow, ResultSet};
use crate::Result;

pub const KIND_BLOCKING: &str = "blocking";
pub const KIND_MEAN_CAPACITY: &str = "mean_capacity";
pub const KIND_KS: &str = "ks_cdf_capacity";
pub const KIND_CONSTRAINT: &str = "constraint_rate";
pub const KIND_MAX_POWER: &str = "max_power_rate";

pub fn curve_rows(
    curve: &DistributionCurve,
    labels: Labels,
    p: &SystemParams,
    method: Method,
    mc: Option<&McSummary>,
) -> Vec<ResultRow> {
    curve
        .abscissae
        .iter()
        .zip(&curve.values)
        .map(|(&x, &v)| {
            let row = ResultRow::new(curve.scenario, labels, p, curve.kind.as_str(), x, v, method);
            match mc {
                Some(s) => row
                    .with_err((v * (1.0 - v) / s.n_samples as f64).sqrt())
                    .with_seed(s.seed),
                None => row.with_err(curve.quad_error),
            }
        })
        .collect()
}

/// What to compute at one parameter point.
#[derive(Debug, Clone)]
pub struct PointJob<'a> {
    pub scenario: ScenarioId,
    pub params: SystemParams,
    pub labels: Labels,
    pub quantities: &'a [Quantity],
    pub mode: Mode,
    pub mc: McConfig,
    /// Value written in the `x` column of scalar rows.
    pub scalar_x: f64,
}

fn needs_mc(job: &PointJob) -> bool {
    if job.mode.montecarlo() {
        return true;
    }
    // No analytic capacity distribution exists for S5.
    job.scenario == ScenarioId::S5
        && job
            .quantities
            .iter()
            .any(|q| matches!(q, Quantity::CapacityCdf | Quantity::MeanCapacity))
}

/// Evaluates one job and appends its rows to `set`.
pub fn evaluate_point(job: &PointJob, set: &mut ResultSet) -> Result<()> {
    let s = job.scenario;
    let p = &job.params;
    let analytic = job.mode.analytic();
    let summary = if needs_mc(job) {
        let cfg = McConfig {
            scenario: s,
            ..job.mc.clone()
        };
        Some(mc::run(p, &cfg)?)
    } else {
        None
    };
    set.note_point(s, job.labels, p, summary.as_ref().map(|m| m.seed));
    let scalar = |kind: &str, value: f64, method: Method| ResultRow::new(s, job.labels, p, kind, job.scalar_x, value, method);

    for &q in job.quantities {
        let mut rows = Vec::new();
        match q {
            Quantity::CapacityCdf => {
                let a = if analytic && s != ScenarioId::S5 {
                    let curve = dist::capacity_cdf(s, p, &job.mc.capacity_grid)?;
                    rows.extend(curve_rows(&curve, job.labels, p, Method::Analytic, None));
                    Some(curve)
                } else {
                    None
                };
                if let Some(m) = &summary {
                    rows.extend(curve_rows(&m.empirical_capacity_cdf, job.labels, p, Method::Mc, Some(m)));
                    if let Some(a) = &a {
                        let ks = mc::ks_distance(&m.empirical_capacity_cdf, a)?;
                        rows.push(scalar(KIND_KS, ks, Method::Mc).with_seed(m.seed));
                    }
                }
            }
            Quantity::CapacityPdf => {
                let grid: Vec<f64> = job.mc.capacity_grid.iter().copied().filter(|y| *y > 0.0).collect();
                let curve = dist::capacity_pdf(s, p, &grid)?;
                rows.extend(curve_rows(&curve, job.labels, p, Method::Analytic, None));
            }
            Quantity::Blocking => {
                if analytic {
                    rows.push(scalar(KIND_BLOCKING, dist::blocking_probability(s, p)?, Method::Analytic));
                }
                if let Some(m) = &summary {
                    rows.push(
                        scalar(KIND_BLOCKING, m.blocking.value(), Method::Mc)
                            .with_err(m.blocking.stderr())
                            .with_seed(m.seed),
                    );
                }
            }
            Quantity::MeanCapacity => {
                if analytic && s != ScenarioId::S5 {
                    rows.push(scalar(KIND_MEAN_CAPACITY, dist::mean_capacity(s, p)?, Method::Analytic));
                }
                if let Some(m) = &summary {
                    rows.push(
                        scalar(KIND_MEAN_CAPACITY, m.mean_capacity, Method::Mc)
                            .with_err(m.mean_capacity_stderr)
                            .with_seed(m.seed),
                    );
                }
            }
            Quantity::PtCdf => {
                if let Some(m) = &summary {
                    rows.extend(curve_rows(&m.pt_cdf, job.labels, p, Method::Mc, Some(m)));
                }
            }
            Quantity::Constraint => {
                if let Some(m) = &summary {
                    for (kind, rate) in [(KIND_CONSTRAINT, m.constraint), (KIND_MAX_POWER, m.max_power)] {
                        let mut row = scalar(kind, rate.value(), Method::Mc).with_seed(m.seed);
                        if rate.trials > 0 {
                            row = row.with_err(rate.stderr());
                        }
                        rows.push(row);
                    }
                }
            }
        }
        set.push(s, q.as_str(), rows);
    }
    Ok(())
}

/// Evaluates every (scenario, point) of a config.
pub fn evaluate(config: &ExperimentConfig) -> Result<ResultSet> {
    let points = config.resolve()?;
    let mut set = ResultSet::default();
    for &scenario in &config.scenarios {
        for point in &points {
            let job = PointJob {
                scenario,
                params: point.params,
                labels: Labels::new(point.c1, point.c2, &point.params),
                quantities: &config.quantities,
                mode: config.mode,
                mc: config.mc_config(scenario),
                scalar_x: point.c2,
            };
            evaluate_point(&job, &mut set)?;
        }
    }
    Ok(set)
}

/// Evaluates a config and writes its CSVs and manifest into `out`.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    let set = evaluate(config)?;
    let mut recorded = config.clone();
    recorded.output_dir = Some(out.to_path_buf());
    set.write(out, Invocation::Run { config: recorded })
}

