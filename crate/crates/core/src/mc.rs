//! Monte Carlo oracle for all five scenarios.
//!
//! Draws are split into `stream_count` contiguous chunks. Chunk `i` uses a
//! ChaCha8 generator seeded with `seed` on stream `i`, so results depend only
//! on `(seed, stream_count, n_samples)` and never on the thread pool.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{default_capacity_grid, linear_grid, CurveKind, DistributionCurve};
use crate::model::{capacity, pu_sinr, su_sinr, ChannelDraw, ScenarioId, SystemParams};
use crate::policy::{
    clamped_power_s5, power_s1, power_s2, power_s3, power_s4, PolicyOutput, S5Method,
};
use crate::{Error, Result};

/// Monte Carlo run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_samples")]
    pub n_samples: u64,
    #[serde(default)]
    pub seed: u64,
    pub scenario: ScenarioId,
    #[serde(default = "default_streams")]
    pub stream_count: u32,
    /// S5 constraint evaluator used inside the per-draw root solve.
    #[serde(default = "default_s5_method")]
    pub s5_method: S5Method,
    /// Capacity grid for the empirical CDF (bits/s/Hz).
    #[serde(default = "default_capacity_grid")]
    pub capacity_grid: Vec<f64>,
    /// Number of points of the transmit-power CDF on `[0, P_m]`.
    #[serde(default = "default_power_points")]
    pub power_points: usize,
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

fn default_power_points() -> usize {
    101
}

impl McConfig {
    pub fn new(scenario: ScenarioId, n_samples: u64, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            scenario,
            stream_count: default_streams(),
            s5_method: default_s5_method(),
            capacity_grid: default_capacity_grid(),
            power_points: default_power_points(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Invalid("n_samples must be at least 1".into()));
        }
        if self.stream_count == 0 {
            return Err(Error::Invalid("stream_count must be at least 1".into()));
        }
        if self.power_points < 2 {
            return Err(Error::Invalid("power_points must be at least 2".into()));
        }
        if self.capacity_grid.is_empty() || self.capacity_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Invalid("capacity_grid must be non-empty and increasing".into()));
        }
        Ok(())
    }
}

/// A rate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: u64,
    pub trials: u64,
}

impl Rate {
    /// `successes / trials`, or NaN without trials.
    pub fn value(&self) -> f64 {
        if self.trials == 0 {
            f64::NAN
        } else {
            self.successes as f64 / self.trials as f64
        }
    }

    /// Standard error of a binomial proportion with probability `p`.
    pub fn sigma_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    /// Standard error at the observed rate.
    pub fn stderr(&self) -> f64 {
        self.sigma_at(self.value())
    }
}

/// Aggregated results of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub scenario: ScenarioId,
    pub n_samples: u64,
    pub seed: u64,
    pub empirical_capacity_cdf: DistributionCurve,
    /// Fraction of draws with `P_t = 0`.
    pub blocking: Rate,
    /// `Pr(γ_p >= γ_T)` among draws with `0 < ps < P_m`. For S2, S3 and S5
    /// each draw's unknown gains are an exact sample of their law given the
    /// known ones, so this is the conditional constraint averaged over the
    /// known quantities.
    pub constraint: Rate,
    /// Fraction of draws transmitting at `P_m`.
    pub max_power: Rate,
    pub mean_capacity: f64,
    pub mean_capacity_stderr: f64,
    pub pt_cdf: DistributionCurve,
}

impl McSummary {
    pub fn blocking_rate(&self) -> f64 {
        self.blocking.value()
    }

    pub fn constraint_satisfaction_rate(&self) -> f64 {
        self.constraint.value()
    }
}

/// Draws one set of gains. S5 additionally draws the estimates `ĝ_p`,
/// `ĝ_sp`: `ĥ ~ CN(0, Ω)` and `h = ρĥ + √(1-ρ²) ẽ` with independent
/// `ẽ ~ CN(0, Ω)`, so `h | ĥ` has exactly the law assumed by the policy.
pub fn draw_channels<R: Rng + ?Sized>(
    params: &SystemParams,
    scenario: ScenarioId,
    rng: &mut R,
) -> ChannelDraw {
    let mut exp = |omega: f64| -> f64 {
        let e: f64 = rng.sample(Exp1);
        omega * e
    };
    let g_s = exp(params.omega_s);
    let g_ps = exp(params.omega_ps);
    if scenario != ScenarioId::S5 {
        let g_p = exp(params.omega_p);
        let g_sp = exp(params.omega_sp);
        return ChannelDraw::new(g_p, g_s, g_ps, g_sp);
    }
    let rho = params.rho;
    let err = (1.0 - rho * rho).sqrt();
    let mut estimated = |omega: f64| -> (f64, f64) {
        let sd = (omega / 2.0).sqrt();
        let mut normal = || -> f64 {
            let z: f64 = rng.sample(StandardNormal);
            sd * z
        };
        let (hr, hi) = (normal(), normal());
        let (er, ei) = (normal(), normal());
        let (tr, ti) = (rho * hr + err * er, rho * hi + err * ei);
        (tr * tr + ti * ti, hr * hr + hi * hi)
    };
    let (g_p, g_p_hat) = estimated(params.omega_p);
    let (g_sp, g_sp_hat) = estimated(params.omega_sp);
    ChannelDraw {
        g_p,
        g_s,
        g_ps,
        g_sp,
        g_p_hat: Some(g_p_hat),
        g_sp_hat: Some(g_sp_hat),
    }
}

/// Policy decision for one draw.
pub fn apply_policy(
    params: &SystemParams,
    scenario: ScenarioId,
    draw: &ChannelDraw,
    s5_method: S5Method,
) -> Result<PolicyOutput> {
    Ok(match scenario {
        ScenarioId::S1 => power_s1(params, draw.g_p, draw.g_sp),
        ScenarioId::S2 => power_s2(params, draw.g_p),
        ScenarioId::S3 => power_s3(params, draw.g_sp),
        ScenarioId::S4 => power_s4(params),
        ScenarioId::S5 => {
            let (Some(gp), Some(gsp)) = (draw.g_p_hat, draw.g_sp_hat) else {
                return Err(Error::Invalid("S5 draw without channel estimates".into()));
            };
            clamped_power_s5(params, gp, gsp, s5_method)?
        }
    })
}

#[derive(Default)]
struct Chunk {
    capacities: Vec<f64>,
    powers: Vec<f64>,
    blocked: u64,
    max_power: u64,
    trials: u64,
    satisfied: u64,
    cap_sum: f64,
    cap_sq_sum: f64,
}

fn run_chunk(params: &SystemParams, cfg: &McConfig, stream: u32, n: u64) -> Result<Chunk> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream as u64);
    let fixed = match cfg.scenario {
        ScenarioId::S4 => Some(power_s4(params)),
        _ => None,
    };
    let mut out = Chunk {
        capacities: Vec::with_capacity(n as usize),
        powers: Vec::with_capacity(n as usize),
        ..Chunk::default()
    };
    for _ in 0..n {
        let draw = draw_channels(params, cfg.scenario, &mut rng);
        let decision = match fixed {
            Some(d) => d,
            None => apply_policy(params, cfg.scenario, &draw, cfg.s5_method)?,
        };
        let pt = decision.pt;
        if decision.blocked {
            out.blocked += 1;
        } else if pt >= params.pm {
            out.max_power += 1;
        } else {
            out.trials += 1;
            if pu_sinr(params, &draw, pt) >= params.gamma_t {
                out.satisfied += 1;
            }
        }
        let c = capacity(su_sinr(params, &draw, pt));
        out.cap_sum += c;
        out.cap_sq_sum += c * c;
        out.capacities.push(c);
        out.powers.push(pt);
    }
    Ok(out)
}

/// Runs `cfg.n_samples` draws of `cfg.scenario`.
pub fn run(params: &SystemParams, cfg: &McConfig) -> Result<McSummary> {
    params.validate()?;
    cfg.validate()?;
    let streams = cfg.stream_count as u64;
    let base = cfg.n_samples / streams;
    let extra = cfg.n_samples % streams;
    let chunks: Vec<Chunk> = (0..cfg.stream_count)
        .into_par_iter()
        .map(|i| {
            let n = base + u64::from((i as u64) < extra);
            run_chunk(params, cfg, i, n)
        })
        .collect::<Result<_>>()?;

    let n = cfg.n_samples;
    let mut capacities = Vec::with_capacity(n as usize);
    let mut powers = Vec::with_capacity(n as usize);
    let (mut blocked, mut max_power, mut trials, mut satisfied) = (0, 0, 0, 0);
    let (mut sum, mut sq) = (0.0, 0.0);
    for c in chunks {
        capacities.extend_from_slice(&c.capacities);
        powers.extend_from_slice(&c.powers);
        blocked += c.blocked;
        max_power += c.max_power;
        trials += c.trials;
        satisfied += c.satisfied;
        sum += c.cap_sum;
        sq += c.cap_sq_sum;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let mut cap_cdf = empirical_cdf(&capacities, &cfg.capacity_grid)?;
    cap_cdf.kind = CurveKind::CdfCapacity;
    cap_cdf.scenario = cfg.scenario;
    let mut pt_cdf = empirical_cdf(&powers, &linear_grid(0.0, params.pm, cfg.power_points))?;
    pt_cdf.kind = CurveKind::CdfPower;
    pt_cdf.scenario = cfg.scenario;
    Ok(McSummary {
        scenario: cfg.scenario,
        n_samples: n,
        seed: cfg.seed,
        empirical_capacity_cdf: cap_cdf,
        blocking: Rate {
            successes: blocked,
            trials: n,
        },
        constraint: Rate {
            successes: satisfied,
            trials,
        },
        max_power: Rate {
            successes: max_power,
            trials: n,
        },
        mean_capacity: mean,
        mean_capacity_stderr: (var / nf).sqrt(),
        pt_cdf,
    })
}

/// Right-continuous empirical CDF `#{s <= x} / n` on an increasing grid.
///
/// The returned curve is tagged `CdfCapacity`/`S1`; callers retag it.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Result<DistributionCurve> {
    if samples.is_empty() {
        return Err(Error::Invalid("empirical CDF of an empty sample".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("grid must be strictly increasing".into()));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::Invalid("NaN sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let values = grid
        .iter()
        .map(|&x| sorted.partition_point(|&s| s <= x) as f64 / n)
        .collect();
    Ok(DistributionCurve {
        abscissae: grid.to_vec(),
        values,
        kind: CurveKind::CdfCapacity,
        scenario: ScenarioId::S1,
        quad_error: 0.0,
    })
}

/// Sup-norm distance between an empirical and an analytic CDF on their
/// shared grid. Use a fine grid: the statistic is only evaluated there.
pub fn ks_distance(empirical: &DistributionCurve, analytic: &DistributionCurve) -> Result<f64> {
    empirical.sup_distance(analytic)
}
