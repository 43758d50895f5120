//! SU transmit-power policies for the five channel-knowledge scenarios.
//!
//! Every policy first computes an unclamped power `ps` that puts the PU SINR
//! constraint exactly at its limit (deterministically for S1, with outage
//! probability `α` otherwise), then clamps it to `[0, P_m]`. `ps <= 0` means
//! the SU is blocked.
//!
//! Scenario 5 has no closed form. Its constraint is
//! `E_Y[Pr(X <= a·Y + β | Y)] = α` where `X`, `Y` are noncentral χ² (2 dof)
//! variables built from the estimated gains. Two evaluators are provided:
//!
//! - [`s5_constraint_residual`]: direct quadrature over the density of `Y`.
//!   This is the reference evaluator.
//! - [`s5_series_lhs`]: the Poisson / Whittaker series. `Pr(X <= x)` for
//!   2 dof equals `Pr(N_{λ1/2} < N_{x/2})` for independent Poisson counts,
//!   so the series becomes a Poisson(`λ1/2`)-weighted tail of the count
//!   `N_{β/2} + K`, where `K` is Poisson with the random mean `a·Y/2`. The
//!   probabilities of `K` are the Whittaker terms
//!   `Pr(K = s) = (a/(1+a))^s/(1+a) · e^{-λ2/2} e^{z/2} M_{-s-1/2,0}(z)/√z`,
//!   `z = λ2 / (2(1+a))`, which are generated here by the equivalent
//!   three-term Laguerre recurrence.

use std::cell::RefCell;

use crate::model::SystemParams;
use crate::numerics::{auto_bracket, find_root, integrate_segments, NumericsError, QuadSpec, RootSpec};
use crate::specfun::{self, ncx2_cdf, ncx2_pdf, poisson_tail_bound, SeriesControl};
use crate::{Error, Result};

/// The SU power decision for one draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyOutput {
    /// Power that meets the constraint with equality; `<= 0` when blocked,
    /// `+inf` when the constraint never binds.
    pub ps_unclamped: f64,
    /// Transmitted power in `[0, P_m]`.
    pub pt: f64,
    pub blocked: bool,
}

impl PolicyOutput {
    pub fn from_unclamped(ps: f64, pm: f64) -> Self {
        let pt = clamp(ps, pm);
        Self {
            ps_unclamped: ps,
            pt,
            blocked: pt <= 0.0,
        }
    }

    fn blocked(ps: f64) -> Self {
        Self {
            ps_unclamped: ps,
            pt: 0.0,
            blocked: true,
        }
    }
}

/// `min(max(ps, 0), pm)`.
pub fn clamp(ps: f64, pm: f64) -> f64 {
    if ps.is_nan() || ps <= 0.0 {
        0.0
    } else {
        ps.min(pm)
    }
}

/// PU SNR below the threshold: no SU power can satisfy the constraint.
/// Shared by S1 and S2, whose blocking events coincide.
pub fn pu_snr_blocked(params: &SystemParams, g_p: f64) -> bool {
    params.pp * g_p <= params.gamma_t * params.sigma2_p
}

/// S1: exact `g_p` and `g_sp`.
pub fn power_s1(params: &SystemParams, g_p: f64, g_sp: f64) -> PolicyOutput {
    let numerator = params.pp * g_p / params.gamma_t - params.sigma2_p;
    if pu_snr_blocked(params, g_p) {
        let ps = if g_sp > 0.0 { numerator / g_sp } else { 0.0 };
        return PolicyOutput::blocked(ps);
    }
    let ps = if g_sp > 0.0 {
        numerator / g_sp
    } else {
        f64::INFINITY
    };
    PolicyOutput::from_unclamped(ps, params.pm)
}

/// S2: exact `g_p`, only the mean of `g_sp`.
pub fn power_s2(params: &SystemParams, g_p: f64) -> PolicyOutput {
    let ps = -(params.pp * g_p - params.gamma_t * params.sigma2_p)
        / (params.alpha.ln() * params.gamma_t * params.omega_sp);
    if pu_snr_blocked(params, g_p) {
        return PolicyOutput::blocked(ps.min(0.0));
    }
    PolicyOutput::from_unclamped(ps, params.pm)
}

/// Power-like constant of S3, `-(ln(1-α) P_p Ω_p / γ_T + σ_p²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario3Aux {
    pub q: f64,
}

impl Scenario3Aux {
    pub fn new(params: &SystemParams) -> Self {
        let q = -((-params.alpha).ln_1p() * params.pp * params.omega_p / params.gamma_t
            + params.sigma2_p);
        Self { q }
    }
}

/// S3: only the mean of `g_p`, exact `g_sp`.
pub fn power_s3(params: &SystemParams, g_sp: f64) -> PolicyOutput {
    let q = Scenario3Aux::new(params).q;
    if q <= 0.0 {
        let ps = if g_sp > 0.0 { q / g_sp } else { q };
        return PolicyOutput::blocked(ps.min(0.0));
    }
    let ps = if g_sp > 0.0 { q / g_sp } else { f64::INFINITY };
    PolicyOutput::from_unclamped(ps, params.pm)
}

/// Unclamped S4 power (deterministic).
pub fn s4_unclamped(params: &SystemParams) -> f64 {
    params.pp * params.omega_p / (params.gamma_t * params.omega_sp)
        * ((-params.c2()).exp() / (1.0 - params.alpha) - 1.0)
}

/// S4: means only. The result does not depend on any channel draw.
pub fn power_s4(params: &SystemParams) -> PolicyOutput {
    PolicyOutput::from_unclamped(s4_unclamped(params), params.pm)
}

/// Parameters of the S5 constraint `Pr(X <= a_coef·Y + beta) = α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario5Terms {
    /// Noncentrality of `X`, `2ρ² ĝ_p / (Ω_p (1-ρ²))`.
    pub lambda1: f64,
    /// Noncentrality of `Y`, `2ρ² ĝ_sp / (Ω_sp (1-ρ²))`.
    pub lambda2: f64,
    /// `γ_T P_s Ω_sp / (Ω_p P_p)`.
    pub a_coef: f64,
    /// `2 σ_p² γ_T / (Ω_p (1-ρ²) P_p)`.
    pub beta: f64,
}

impl Scenario5Terms {
    pub fn new(params: &SystemParams, g_p_hat: f64, g_sp_hat: f64, ps: f64) -> Result<Self> {
        if !(g_p_hat >= 0.0 && g_sp_hat >= 0.0) {
            return Err(Error::Invalid(format!(
                "channel estimates must be nonnegative (got {g_p_hat}, {g_sp_hat})"
            )));
        }
        if !(params.rho >= 0.0 && params.rho < 1.0) {
            return Err(Error::Invalid(format!("rho must lie in [0, 1) (got {})", params.rho)));
        }
        let r2 = params.rho * params.rho;
        let one_minus = 1.0 - r2;
        Ok(Self {
            lambda1: 2.0 * r2 * g_p_hat / (params.omega_p * one_minus),
            lambda2: 2.0 * r2 * g_sp_hat / (params.omega_sp * one_minus),
            a_coef: params.gamma_t * ps.max(0.0) * params.omega_sp / (params.omega_p * params.pp),
            beta: 2.0 * params.sigma2_p * params.gamma_t / (params.omega_p * one_minus * params.pp),
        })
    }

    /// Same estimates, different SU power.
    pub fn with_power(&self, params: &SystemParams, ps: f64) -> Self {
        Self {
            a_coef: params.gamma_t * ps.max(0.0) * params.omega_sp / (params.omega_p * params.pp),
            ..*self
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.lambda1, self.lambda2, self.a_coef, self.beta]
            .iter()
            .all(|v| *v >= 0.0 && v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("invalid S5 terms {self:?}")))
        }
    }
}

/// Quadrature tolerances used for the S5 reference evaluator.
pub const S5_QUAD: QuadSpec = QuadSpec {
    abs_tol: 1e-11,
    rel_tol: 1e-11,
    max_subdivisions: 4000,
};

/// `E_Y[F_X(a·Y + β)]` by quadrature over the density of `Y`.
pub fn s5_outage_quadrature(terms: &Scenario5Terms) -> Result<f64> {
    terms.validate()?;
    if terms.a_coef == 0.0 {
        return Ok(ncx2_cdf(terms.lambda1, terms.beta)?);
    }
    let mean = terms.lambda2 + 2.0;
    let sd = 2.0 * (1.0 + terms.lambda2).sqrt();
    let mut points = vec![0.0];
    let lo = mean - 10.0 * sd;
    if lo > 0.0 {
        points.push(lo);
    }
    // Centre of the step of F_X(a·y + β) in y.
    let step = (terms.lambda1 + 2.0 - terms.beta) / terms.a_coef;
    let hi = mean + 12.0 * sd;
    if step > *points.last().unwrap() && step < hi {
        points.push(step);
    }
    points.push(hi);
    points.push(f64::INFINITY);

    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |y: f64| -> f64 {
        if y <= 0.0 || y.is_infinite() {
            return 0.0;
        }
        let eval = || -> Result<f64> {
            let density = ncx2_pdf(terms.lambda2, y)?;
            if density == 0.0 {
                return Ok(0.0);
            }
            Ok(density * ncx2_cdf(terms.lambda1, terms.a_coef * y + terms.beta)?)
        };
        match eval() {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let out = integrate_segments(integrand, &points, &S5_QUAD);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(out?.value.clamp(0.0, 1.0))
}

/// Reference S5 constraint residual, `E_Y[F_X(a·Y + β)] - α`.
///
/// Strictly increasing in `a_coef` and therefore in the SU power.
pub fn s5_constraint_residual(params: &SystemParams, terms: &Scenario5Terms) -> Result<f64> {
    Ok(s5_outage_quadrature(terms)? - params.alpha)
}

/// `Pr(K = s)` for `s = 0, 1, …` until the remaining mass is below `tol`,
/// where `K | Y ~ Poisson(a·Y/2)` and `Y ~ χ'²_2(λ2)`.
fn mixed_poisson_terms(a: f64, lambda2: f64, max_len: usize, tol: f64) -> Vec<f64> {
    if a == 0.0 {
        return vec![1.0];
    }
    let q = a / (1.0 + a);
    let z = lambda2 / (2.0 * (1.0 + a));
    let mut ln_u = -lambda2 * q / 2.0 - a.ln_1p();
    let mut out = Vec::with_capacity(max_len.min(1024));
    let mut cumulative = 0.0;
    let mut ratio = 0.0;
    for s in 0..max_len {
        if s > 0 {
            let sf = s as f64;
            ratio = if s == 1 {
                q * (1.0 + z)
            } else {
                let prev = sf - 1.0;
                q / sf * ((2.0 * prev + 1.0 + z) - prev * q / ratio)
            };
            ln_u += ratio.max(f64::MIN_POSITIVE).ln();
        }
        let u = ln_u.exp();
        out.push(u);
        cumulative += u;
        if 1.0 - cumulative < tol && ratio < 1.0 {
            break;
        }
    }
    out
}

/// The `s`-th Whittaker term of the S5 series, evaluated directly with
/// [`specfun::whittaker_m`]:
/// `(a/(1+a))^s/(1+a) · e^{-λ2/2} e^{z/2} M_{-s-1/2,0}(z) / √z`.
pub fn s5_whittaker_term(terms: &Scenario5Terms, s: usize) -> Result<f64> {
    let a = terms.a_coef;
    let q = a / (1.0 + a);
    let z = terms.lambda2 / (2.0 * (1.0 + a));
    let prefactor = if s == 0 { 1.0 } else { q.powi(s as i32) } / (1.0 + a);
    if z == 0.0 {
        // M_{κ,0}(z)/√z → 1 as z → 0.
        return Ok(prefactor);
    }
    let ctl = SeriesControl::default();
    let m = specfun::whittaker_m(-(s as f64) - 0.5, 0.0, z, ctl)?;
    Ok(prefactor * (-0.5 * terms.lambda2 + 0.5 * z).exp() * m / z.sqrt())
}

/// `E_Y[F_X(a·Y + β)]` by the closed-form series.
pub fn s5_series_lhs(terms: &Scenario5Terms) -> Result<f64> {
    s5_series_lhs_with(terms, SeriesControl::default())
}

pub fn s5_series_lhs_with(terms: &Scenario5Terms, ctl: SeriesControl) -> Result<f64> {
    terms.validate()?;
    let mean1 = 0.5 * terms.lambda1;
    let mean_b = 0.5 * terms.beta;
    // Largest j needed for the outer Poisson weights.
    let mut j_max = 0usize;
    while poisson_tail_bound(mean1, (j_max + 1) as f64) >= ctl.abs_tol {
        j_max += 1;
        if j_max >= ctl.max_terms {
            return Err(specfun::SpecfunError::NonConvergence {
                function: "s5_series_lhs",
                terms: ctl.max_terms,
                last_term: poisson_tail_bound(mean1, j_max as f64),
            }
            .into());
        }
    }
    let len = j_max + 1;
    let u = mixed_poisson_terms(terms.a_coef, terms.lambda2, len, ctl.abs_tol * 1e-3);
    // Poisson(β/2) probabilities.
    let p: Vec<f64> = if mean_b == 0.0 {
        vec![1.0]
    } else {
        let ln_m = mean_b.ln();
        let mut ln_p = -mean_b;
        let mut v = Vec::with_capacity(len);
        for k in 0..len {
            if k > 0 {
                ln_p += ln_m - (k as f64).ln();
            }
            v.push(ln_p.exp());
        }
        v
    };
    let ln_m1 = if mean1 > 0.0 { mean1.ln() } else { f64::NEG_INFINITY };
    let mut ln_w = -mean1;
    let mut cumulative_t = 0.0;
    let mut sum = 0.0;
    for j in 0..len {
        // T_j = Σ_s p_{j-s} u_s
        let s_lo = j.saturating_sub(p.len() - 1);
        let s_hi = j.min(u.len() - 1);
        let mut t = 0.0;
        if s_lo <= s_hi {
            for s in s_lo..=s_hi {
                t += p[j - s] * u[s];
            }
        }
        cumulative_t += t;
        if j > 0 {
            ln_w += ln_m1 - (j as f64).ln();
        }
        let w = if mean1 == 0.0 {
            if j == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            ln_w.exp()
        };
        let tail_t = (1.0 - cumulative_t).max(0.0);
        sum += w * tail_t;
        if tail_t < ctl.abs_tol {
            break;
        }
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// How the S5 constraint is evaluated while solving for the power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S5Method {
    /// Quadrature reference evaluator.
    #[default]
    Quadrature,
    /// Closed-form series; matches the quadrature to ~1e-10.
    Series,
}

fn s5_lhs(terms: &Scenario5Terms, method: S5Method) -> Result<f64> {
    match method {
        S5Method::Quadrature => s5_outage_quadrature(terms),
        S5Method::Series => s5_series_lhs(terms),
    }
}

/// Root tolerance on the S5 power.
pub const S5_ROOT: RootSpec = RootSpec {
    abs_tol: 1e-10,
    max_iterations: 200,
};

/// S5 power from the estimated gains, using the quadrature reference.
pub fn power_s5(params: &SystemParams, g_p_hat: f64, g_sp_hat: f64) -> Result<PolicyOutput> {
    power_s5_with(params, g_p_hat, g_sp_hat, S5Method::Quadrature)
}

pub fn power_s5_with(
    params: &SystemParams,
    g_p_hat: f64,
    g_sp_hat: f64,
    method: S5Method,
) -> Result<PolicyOutput> {
    let base = Scenario5Terms::new(params, g_p_hat, g_sp_hat, 0.0)?;
    // At zero power the outage is Pr(X <= β); if that already reaches α the
    // constraint cannot be met.
    let at_zero = ncx2_cdf(base.lambda1, base.beta)? - params.alpha;
    if at_zero >= 0.0 {
        return Ok(PolicyOutput::blocked(0.0));
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let residual = |ps: f64| -> f64 {
        match s5_lhs(&base.with_power(params, ps), method) {
            Ok(v) => v - params.alpha,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let bracket = auto_bracket(&residual, params.pm, 2.0);
    if let Some(e) = failure.borrow_mut().take() {
        return Err(e);
    }
    let (lo, hi) = match bracket {
        Ok(b) => b,
        // The residual stays negative: even huge powers keep the outage below α.
        Err(NumericsError::BracketNotFound { .. }) => {
            return Ok(PolicyOutput::from_unclamped(f64::INFINITY, params.pm))
        }
        Err(e) => return Err(e.into()),
    };
    let spec = RootSpec {
        abs_tol: S5_ROOT.abs_tol * hi.max(1.0),
        ..S5_ROOT
    };
    let root = find_root(&residual, lo, hi, &spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(PolicyOutput::from_unclamped(root?, params.pm))
}

/// S5 transmitted power only. Cheaper than [`power_s5_with`]: when the
/// constraint still holds at `P_m` no root is searched, and the returned
/// `ps_unclamped` is then `+inf` (the exact unclamped power is not resolved).
pub fn clamped_power_s5(
    params: &SystemParams,
    g_p_hat: f64,
    g_sp_hat: f64,
    method: S5Method,
) -> Result<PolicyOutput> {
    let base = Scenario5Terms::new(params, g_p_hat, g_sp_hat, 0.0)?;
    if ncx2_cdf(base.lambda1, base.beta)? - params.alpha >= 0.0 {
        return Ok(PolicyOutput::blocked(0.0));
    }
    let at_max = s5_lhs(&base.with_power(params, params.pm), method)? - params.alpha;
    if at_max <= 0.0 {
        return Ok(PolicyOutput {
            ps_unclamped: f64::INFINITY,
            pt: params.pm,
            blocked: false,
        });
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let residual = |ps: f64| -> f64 {
        match s5_lhs(&base.with_power(params, ps), method) {
            Ok(v) => v - params.alpha,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let spec = RootSpec {
        abs_tol: S5_ROOT.abs_tol * params.pm.max(1.0),
        ..S5_ROOT
    };
    let root = find_root(&residual, 0.0, params.pm, &spec);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(PolicyOutput::from_unclamped(root?, params.pm))
}
