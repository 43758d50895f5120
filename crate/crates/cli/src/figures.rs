//! Data series behind each published figure.
//!
//! | id   | content                                                         |
//! |------|-----------------------------------------------------------------|
//! | fig2 | capacity CDFs, c1 = c2 = 0.1, S1-S4 analytic + MC, S5 MC         |
//! | fig3 | as fig2 with c1 = 0.01                                           |
//! | fig4 | as fig2 with c1 = 0.9, plus S3/S4 at α = 0.096                   |
//! | fig5 | transmit-power CDFs of S1/S2 at c1 ∈ {0.1, 0.9}, c2 = 0.1        |
//! | fig6 | capacity CDFs of S1/S2 (+ S5 MC) at c1 = 0.01, c2 ∈ {0.5, 0.9}   |
//! | fig7 | Pr(C <= 0.5) of S1/S2 against c1, c2 ∈ {0.5, 0.9}                 |
//! | fig8 | blocking against c2: S1/S2, S5 at ρ ∈ {0.9, 0.99}, α ∈ {0.1, 0.3} |

use std::str::FromStr;

use cogcap::dist::{default_capacity_grid, linear_grid};
use cogcap::{make_params_from_ratios, McConfig, ParamOverrides, ScenarioId, SystemParams};

use crate::config::{Mode, Quantity};
use crate::experiment::{evaluate_point, PointJob};
use crate::output::{Labels, ResultSet};
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        Self::Fig2,
        Self::Fig3,
        Self::Fig4,
        Self::Fig5,
        Self::Fig6,
        Self::Fig7,
        Self::Fig8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fig2 => "fig2",
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Fig6 => "fig6",
            Self::Fig7 => "fig7",
            Self::Fig8 => "fig8",
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| CliError::UnknownFigure(s.to_string()))
    }
}

/// Paper-default parameters at `(c1, c2)` with the given `α`, `ρ`.
pub fn figure_params(c1: f64, c2: f64, alpha: f64, rho: f64) -> Result<SystemParams> {
    let overrides = ParamOverrides {
        alpha: Some(alpha),
        rho: Some(rho),
        ..ParamOverrides::default()
    };
    Ok(make_params_from_ratios(c1, c2, &overrides).map_err(cogcap::Error::from)?)
}

/// `c1` values of the fig7 sweep: 21 log-spaced points on `[0.01, 1]`.
pub fn fig7_c1_grid() -> Vec<f64> {
    linear_grid(-2.0, 0.0, 21).into_iter().map(|e| 10f64.powf(e)).collect()
}

/// `c2` values of the fig8 sweep.
pub fn fig8_c2_grid() -> Vec<f64> {
    linear_grid(0.05, 1.0, 20)
}

struct Figure {
    samples: u64,
    seed: u64,
    set: ResultSet,
}

impl Figure {
    fn mc(&self, scenario: ScenarioId, grid: Vec<f64>) -> McConfig {
        McConfig {
            capacity_grid: grid,
            ..McConfig::new(scenario, self.samples, self.seed)
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn job(
        &mut self,
        scenario: ScenarioId,
        (c1, c2): (f64, f64),
        params: SystemParams,
        quantities: &[Quantity],
        mode: Mode,
        grid: Vec<f64>,
        scalar_x: f64,
    ) -> Result<()> {
        let job = PointJob {
            scenario,
            labels: Labels::new(c1, c2, &params),
            params,
            quantities,
            mode,
            mc: self.mc(scenario, grid),
            scalar_x,
        };
        evaluate_point(&job, &mut self.set)
    }

    /// Capacity CDFs of S1-S4 (analytic and MC) and S5 (MC) at one point.
    fn capacity_panel(&mut self, c1: f64, c2: f64, scenarios: &[ScenarioId]) -> Result<()> {
        let p = figure_params(c1, c2, 0.1, 0.9)?;
        for &s in scenarios {
            let quantities: &[Quantity] = if s == ScenarioId::S5 {
                &[Quantity::CapacityCdf, Quantity::Blocking]
            } else {
                &[Quantity::CapacityCdf]
            };
            self.job(s, (c1, c2), p, quantities, Mode::Both, default_capacity_grid(), c2)?;
        }
        Ok(())
    }
}

/// Computes the data of one figure. `samples` and `seed` drive every Monte
/// Carlo series in it.
pub fn reproduce_figure(id: FigureId, samples: u64, seed: u64) -> Result<ResultSet> {
    use ScenarioId::*;
    let mut fig = Figure {
        samples,
        seed,
        set: ResultSet::default(),
    };
    match id {
        FigureId::Fig2 => fig.capacity_panel(0.1, 0.1, &ScenarioId::ALL)?,
        FigureId::Fig3 => fig.capacity_panel(0.01, 0.1, &ScenarioId::ALL)?,
        FigureId::Fig4 => {
            fig.capacity_panel(0.9, 0.1, &ScenarioId::ALL)?;
            let p = figure_params(0.9, 0.1, 0.096, 0.9)?;
            for s in [S3, S4] {
                fig.job(s, (0.9, 0.1), p, &[Quantity::CapacityCdf], Mode::Both, default_capacity_grid(), 0.1)?;
            }
        }
        FigureId::Fig5 => {
            for c1 in [0.1, 0.9] {
                let p = figure_params(c1, 0.1, 0.1, 0.9)?;
                for s in [S1, S2] {
                    fig.job(
                        s,
                        (c1, 0.1),
                        p,
                        &[Quantity::PtCdf, Quantity::Constraint],
                        Mode::Montecarlo,
                        default_capacity_grid(),
                        c1,
                    )?;
                }
            }
        }
        FigureId::Fig6 => {
            for c2 in [0.5, 0.9] {
                fig.capacity_panel(0.01, c2, &[S1, S2, S5])?;
            }
        }
        FigureId::Fig7 => {
            for c2 in [0.5, 0.9] {
                for c1 in fig7_c1_grid() {
                    let p = figure_params(c1, c2, 0.1, 0.9)?;
                    for s in [S1, S2] {
                        fig.job(s, (c1, c2), p, &[Quantity::CapacityCdf], Mode::Both, vec![0.5], c1)?;
                    }
                }
            }
        }
        FigureId::Fig8 => {
            for c2 in fig8_c2_grid() {
                let p = figure_params(0.1, c2, 0.1, 0.9)?;
                for s in [S1, S2] {
                    fig.job(s, (0.1, c2), p, &[Quantity::Blocking], Mode::Analytic, default_capacity_grid(), c2)?;
                }
                for rho in [0.9, 0.99] {
                    for alpha in [0.1, 0.3] {
                        let p = figure_params(0.1, c2, alpha, rho)?;
                        fig.job(S5, (0.1, c2), p, &[Quantity::Blocking], Mode::Analytic, default_capacity_grid(), c2)?;
                    }
                }
            }
        }
    }
    Ok(fig.set)
}
