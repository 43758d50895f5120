//! Analytic distributions of the SU received power `γ = P_t g_s`, the SU SINR
//! `γ_I`, the capacity `C = log2(1 + γ_I)`, plus mean capacity and blocking.
//!
//! All CDFs are right-continuous and include the atom at zero contributed by
//! blocking: `F(0) = Pr(P_t = 0)`.
//!
//! S1 and S2 need one numerical integral per point; S3 and S4 are closed
//! form. S5 has no analytic capacity distribution (see [`crate::mc`]), but its
//! blocking probability is available here.

use serde::{Deserialize, Serialize};

use crate::model::{ScenarioId, SystemParams};
use crate::numerics::{find_root, integrate, Integral, QuadSpec, RootSpec};
use crate::policy::{power_s4, Scenario3Aux};
use crate::specfun::{exp_scaled_e1, ncx2_cdf};
use crate::{Error, Result};

/// Quadrature tolerances used for every analytic distribution.
pub const DIST_QUAD: QuadSpec = QuadSpec {
    abs_tol: 1e-12,
    rel_tol: 1e-10,
    max_subdivisions: 4000,
};

/// What a [`DistributionCurve`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    CdfGamma,
    CdfGammaI,
    PdfGammaI,
    CdfCapacity,
    PdfCapacity,
    /// CDF of the transmitted SU power.
    CdfPower,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CdfGamma => "cdf_gamma",
            Self::CdfGammaI => "cdf_gamma_i",
            Self::PdfGammaI => "pdf_gamma_i",
            Self::CdfCapacity => "cdf_capacity",
            Self::PdfCapacity => "pdf_capacity",
            Self::CdfPower => "cdf_power",
        }
    }

    pub fn is_cdf(self) -> bool {
        !matches!(self, Self::PdfGammaI | Self::PdfCapacity)
    }
}

/// A distribution evaluated on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionCurve {
    pub abscissae: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: CurveKind,
    pub scenario: ScenarioId,
    /// Largest quadrature error estimate over the grid (0 for closed forms
    /// and empirical curves).
    pub quad_error: f64,
}

impl DistributionCurve {
    /// Checks grid ordering and the CDF/PDF range invariants.
    pub fn check_invariants(&self) -> Result<()> {
        if self.abscissae.len() != self.values.len() {
            return Err(Error::Consistency("grid and values differ in length".into()));
        }
        if self.abscissae.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Consistency("abscissae not strictly increasing".into()));
        }
        if self.kind.is_cdf() {
            if self.values.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Consistency("CDF value outside [0, 1]".into()));
            }
            if self.values.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Consistency("CDF decreases".into()));
            }
        } else if self.values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Consistency("negative density".into()));
        }
        Ok(())
    }

    /// Largest absolute difference between two curves on a shared grid.
    pub fn sup_distance(&self, other: &DistributionCurve) -> Result<f64> {
        if self.abscissae != other.abscissae {
            return Err(Error::Invalid("curves use different grids".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Default capacity grid: 161 points on `[0, 8]` bits/s/Hz.
pub fn default_capacity_grid() -> Vec<f64> {
    linear_grid(0.0, 8.0, 161)
}

fn check_nonneg(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("{name} must be nonnegative (got {x})")))
    }
}

fn mixing_mean(params: &SystemParams, f: impl FnMut(f64) -> f64) -> Result<Integral> {
    // E over g_ps ~ Exp(Ω_ps) written in v.
    let omega = params.omega_ps;
    let mut f = f;
    Ok(integrate(
        |v| f(v) * (-v / omega).exp() / omega,
        0.0,
        f64::INFINITY,
        &DIST_QUAD,
    )?)
}

// ---------------------------------------------------------------- scenario 1

/// Constants shared by the S1 expressions.
struct S1Consts {
    /// `Ω_sp γ_T / (P_p Ω_p Ω_s)`
    k: f64,
    /// `1 / (P_m Ω_s)`
    b: f64,
    /// `e^{-c2}`
    e_c2: f64,
}

impl S1Consts {
    fn new(p: &SystemParams) -> Self {
        Self {
            k: p.omega_sp * p.gamma_t / (p.pp * p.omega_p * p.omega_s),
            b: 1.0 / (p.pm * p.omega_s),
            e_c2: (-p.c2()).exp(),
        }
    }

    /// `k x e^{kx} Γ(0, (k+b)x)`, written without overflow.
    fn gamma_term(&self, x: f64) -> Result<f64> {
        Ok(self.k * x * (-self.b * x).exp() * exp_scaled_e1((self.k + self.b) * x)?)
    }

    fn cdf_gamma(&self, x: f64) -> Result<f64> {
        Ok(1.0 - self.e_c2 * ((-self.b * x).exp() - self.gamma_term(x)?))
    }

    fn pdf_gamma(&self, x: f64) -> Result<f64> {
        let s = exp_scaled_e1((self.k + self.b) * x)?;
        Ok(self.e_c2
            * (-self.b * x).exp()
            * ((self.b - self.k) + (self.k * self.k * x + self.k) * s))
    }
}

fn s1_cdf_gamma_i(p: &SystemParams, y: f64) -> Result<(f64, f64)> {
    let c = S1Consts::new(p);
    let direct = p.pm * p.omega_s * (-y * p.sigma2_s / (p.pm * p.omega_s)).exp()
        / (p.pm * p.omega_s + y * p.pp * p.omega_ps);
    let mut err = None;
    let integral = mixing_mean(p, |v| {
        let x = y * (p.sigma2_s + p.pp * v);
        c.gamma_term(x).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((1.0 - c.e_c2 * (direct - integral.value), c.e_c2 * integral.abs_error))
}

fn s1_pdf_gamma_i(p: &SystemParams, y: f64) -> Result<(f64, f64)> {
    let c = S1Consts::new(p);
    let mut err = None;
    let integral = mixing_mean(p, |v| {
        let w = p.sigma2_s + p.pp * v;
        w * c.pdf_gamma(y * w).unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((integral.value, integral.abs_error))
}

// ---------------------------------------------------------------- scenario 2

struct S2Consts {
    /// Lower limit: `g_p` below which the SU is blocked.
    psi0: f64,
    /// Upper limit: `g_p` above which the SU transmits at `P_m`.
    psi: f64,
    /// `ln(α) γ_T Ω_sp` (negative)
    ell: f64,
}

impl S2Consts {
    fn new(p: &SystemParams) -> Self {
        let ln_a = p.alpha.ln();
        Self {
            psi0: p.gamma_t * p.sigma2_p / p.pp,
            psi: p.gamma_t * (p.sigma2_p - p.pm * ln_a * p.omega_sp) / p.pp,
            ell: ln_a * p.gamma_t * p.omega_sp,
        }
    }

    /// `(P_p y - γ_T σ_p²) Ω_s`, positive inside `(ψ0, ψ)`.
    fn d(&self, p: &SystemParams, y: f64) -> f64 {
        (p.pp * y - p.gamma_t * p.sigma2_p) * p.omega_s
    }
}

fn s2_cdf_gamma(p: &SystemParams, x: f64) -> Result<(f64, f64)> {
    let c = S2Consts::new(p);
    let head = (-x / (p.pm * p.omega_s) - c.psi / p.omega_p).exp();
    let integral = integrate(
        |y| {
            let d = c.d(p, y);
            if d <= 0.0 {
                return 0.0;
            }
            (c.ell * x / d).exp() * (-y / p.omega_p).exp()
        },
        c.psi0,
        c.psi,
        &DIST_QUAD,
    )?;
    Ok((
        1.0 - head - integral.value / p.omega_p,
        integral.abs_error / p.omega_p,
    ))
}

fn s2_a(p: &SystemParams, y: f64) -> f64 {
    p.pm * p.omega_s * (-y * p.sigma2_s / (p.pm * p.omega_s)).exp()
        / (p.pm * p.omega_s + y * p.pp * p.omega_ps)
}

/// The `g_ps` average of the conditional CCDF of `γ_I` for a given `g_p = y`
/// with `P_s(y) < P_m`, and its `ỹ`-derivative factor.
fn s2_inner(p: &SystemParams, c: &S2Consts, yt: f64, y: f64) -> Result<(f64, f64)> {
    s2_inner_at(p, c, yt, y, c.d(p, y))
}

/// [`s2_inner`] with `d` supplied, so callers near `ψ0` can avoid cancellation.
fn s2_inner_at(p: &SystemParams, c: &S2Consts, yt: f64, y: f64, d: f64) -> Result<(f64, f64)> {
    if d <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let denom = d - c.ell * yt * p.pp * p.omega_ps;
    if denom <= 0.0 {
        return Err(Error::Consistency(format!(
            "S2 mixing denominator nonpositive at g_p = {y}, y~ = {yt}"
        )));
    }
    let g = (c.ell * yt * p.sigma2_s / d).exp() * d / denom;
    let dlog = c.ell * p.sigma2_s / d + c.ell * p.pp * p.omega_ps / denom;
    Ok((g, g * dlog))
}

fn s2_cdf_gamma_i(p: &SystemParams, yt: f64) -> Result<(f64, f64)> {
    let c = S2Consts::new(p);
    let mut err = None;
    let integral = integrate(
        |y| match s2_inner(p, &c, yt, y) {
            Ok((g, _)) => g * (-y / p.omega_p).exp(),
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        c.psi0,
        c.psi,
        &DIST_QUAD,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((
        1.0 - s2_a(p, yt) * (-c.psi / p.omega_p).exp() - integral.value / p.omega_p,
        integral.abs_error / p.omega_p,
    ))
}

fn s2_pdf_gamma_i(p: &SystemParams, yt: f64) -> Result<(f64, f64)> {
    let c = S2Consts::new(p);
    let a = s2_a(p, yt);
    let a_prime = a
        * (-p.sigma2_s / (p.pm * p.omega_s) - p.pp * p.omega_ps / (p.pm * p.omega_s + yt * p.pp * p.omega_ps));
    // The integrand peaks like e^{-k/d}/d near ψ0 with k ∝ ỹ, so integrate in
    // t = ln(g_p - ψ0). Below `lo` the factor e^{-k/d} underflows.
    let k = -c.ell * yt * p.sigma2_s / (p.pp * p.omega_s);
    let hi = (c.psi - c.psi0).ln();
    let lo = (k / 800.0).ln().min(hi - 1.0);
    let mut err = None;
    let integral = integrate(
        |t| {
            let u = t.exp();
            let y = c.psi0 + u;
            match s2_inner_at(p, &c, yt, y, p.pp * u * p.omega_s) {
                Ok((_, dg)) => dg * (-y / p.omega_p).exp() * u,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        lo,
        hi,
        &DIST_QUAD,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok((
        -a_prime * (-c.psi / p.omega_p).exp() - integral.value / p.omega_p,
        integral.abs_error / p.omega_p,
    ))
}

// ---------------------------------------------------------------- scenario 3

/// Closed-form pieces of the S3 SINR distribution,
/// `F(ỹ) = 1 - s(ỹ) - h(ỹ) E1(r(ỹ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario3Shape {
    pub q: f64,
    /// `1 - e^{-Q/(P_m Ω_sp)}`
    pub k1: f64,
    /// `Q Ω_s e^{-Q/(P_m Ω_sp)} / (P_p Ω_ps Ω_sp)`
    pub k2: f64,
    /// `P_p Ω_ps / (P_m Ω_s)`
    pub a: f64,
    /// `σ_s² / (P_m Ω_s)`
    pub b: f64,
    /// `P_m P_p Ω_s Ω_ps Ω_sp`
    pub c: f64,
    pp: f64,
    pm: f64,
    sigma2_s: f64,
    omega_s: f64,
    omega_ps: f64,
    omega_sp: f64,
}

impl Scenario3Shape {
    /// `None` when the SU is blocked (`Q <= 0`).
    pub fn new(p: &SystemParams) -> Option<Self> {
        let q = Scenario3Aux::new(p).q;
        if q <= 0.0 {
            return None;
        }
        let e = (-q / (p.pm * p.omega_sp)).exp();
        Some(Self {
            q,
            k1: 1.0 - e,
            k2: q * p.omega_s * e / (p.pp * p.omega_ps * p.omega_sp),
            a: p.pp * p.omega_ps / (p.pm * p.omega_s),
            b: p.sigma2_s / (p.pm * p.omega_s),
            c: p.pm * p.pp * p.omega_s * p.omega_ps * p.omega_sp,
            pp: p.pp,
            pm: p.pm,
            sigma2_s: p.sigma2_s,
            omega_s: p.omega_s,
            omega_ps: p.omega_ps,
            omega_sp: p.omega_sp,
        })
    }

    pub fn s(&self, y: f64) -> f64 {
        self.k1 * (-self.b * y).exp() / (1.0 + self.a * y)
    }

    pub fn s_prime(&self, y: f64) -> f64 {
        let u = 1.0 + self.a * y;
        -(self.k1 * self.a + self.b * self.k1 * u) / (u * u) * (-self.b * y).exp()
    }

    pub fn r(&self, y: f64) -> f64 {
        (self.pp * self.omega_ps * y + self.pm * self.omega_s)
            * (self.sigma2_s * self.omega_sp * y + self.q * self.omega_s)
            / (self.c * y)
    }

    pub fn r_prime(&self, y: f64) -> f64 {
        (self.pp * self.sigma2_s * self.omega_ps * self.omega_sp * y * y
            - self.q * self.pm * self.omega_s * self.omega_s)
            / (self.c * y * y)
    }

    /// `h(ỹ) = K2 e^{-bỹ + r(ỹ)} / ỹ`; overflows for small `ỹ`, use the
    /// scaled products below in computations.
    pub fn h(&self, y: f64) -> f64 {
        self.k2 * (-self.b * y + self.r(y)).exp() / y
    }

    pub fn h_prime(&self, y: f64) -> f64 {
        self.k2 * (y * (self.r_prime(y) - self.b) - 1.0) / (y * y) * (-self.b * y + self.r(y)).exp()
    }

    pub fn cdf(&self, y: f64) -> Result<f64> {
        if y == 0.0 {
            return Ok(0.0);
        }
        let r = self.r(y);
        if !(r > 0.0) {
            return Err(Error::Consistency(format!("S3 shape r({y}) = {r} is not positive")));
        }
        // h E1(r) = K2 e^{-bỹ} (e^r E1(r)) / ỹ
        let h_e1 = self.k2 * (-self.b * y).exp() * exp_scaled_e1(r)? / y;
        Ok(1.0 - self.s(y) - h_e1)
    }

    pub fn pdf(&self, y: f64) -> Result<f64> {
        let r = self.r(y);
        if !(r > 0.0) {
            return Err(Error::Consistency(format!("S3 shape r({y}) = {r} is not positive")));
        }
        let r_p = self.r_prime(y);
        let scaled = self.k2 * (-self.b * y).exp();
        let hp_e1 = scaled * (y * (r_p - self.b) - 1.0) / (y * y) * exp_scaled_e1(r)?;
        let h_term = scaled / y * r_p / r;
        Ok(-self.s_prime(y) - hp_e1 + h_term)
    }
}

fn s3_cdf_gamma(p: &SystemParams, x: f64) -> f64 {
    let q = Scenario3Aux::new(p).q;
    if q <= 0.0 {
        return 1.0;
    }
    let e = (-q / (p.pm * p.omega_sp)).exp();
    1.0 - (-x / (p.pm * p.omega_s)).exp() * ((1.0 - e) + e / (1.0 + x * p.omega_sp / (q * p.omega_s)))
}

// ---------------------------------------------------------------- scenario 4

fn s4_cdf_gamma_i(p: &SystemParams, pt: f64, y: f64) -> f64 {
    let ps = pt * p.omega_s;
    1.0 - ps / (y * p.pp * p.omega_ps + ps) * (-y * p.sigma2_s / ps).exp()
}

fn s4_pdf_gamma_i(p: &SystemParams, pt: f64, y: f64) -> f64 {
    let ps = pt * p.omega_s;
    let den = y * p.pp * p.omega_ps + ps;
    (-y * p.sigma2_s / ps).exp() * (p.sigma2_s / den + ps * p.pp * p.omega_ps / (den * den))
}

// ---------------------------------------------------------------- public API

fn unsupported(operation: &'static str, scenario: ScenarioId) -> Error {
    Error::Unsupported {
        operation,
        scenario,
    }
}

/// CDF of `γ = P_t g_s` at `x`, with quadrature error estimate.
pub fn cdf_gamma_with_error(scenario: ScenarioId, p: &SystemParams, x: f64) -> Result<(f64, f64)> {
    check_nonneg("x", x)?;
    p.validate()?;
    if x == 0.0 {
        return Ok((blocking_probability(scenario, p)?, 0.0));
    }
    let (v, e) = match scenario {
        ScenarioId::S1 => (S1Consts::new(p).cdf_gamma(x)?, 0.0),
        ScenarioId::S2 => s2_cdf_gamma(p, x)?,
        ScenarioId::S3 => (s3_cdf_gamma(p, x), 0.0),
        ScenarioId::S4 => {
            let pt = power_s4(p).pt;
            if pt <= 0.0 {
                (1.0, 0.0)
            } else {
                (-(-x / (pt * p.omega_s)).exp_m1(), 0.0)
            }
        }
        ScenarioId::S5 => return Err(unsupported("cdf_gamma", scenario)),
    };
    Ok((v.clamp(0.0, 1.0), e))
}

pub fn cdf_gamma(scenario: ScenarioId, p: &SystemParams, x: f64) -> Result<f64> {
    Ok(cdf_gamma_with_error(scenario, p, x)?.0)
}

/// CDF of the SU SINR `γ_I` at `ỹ`, with quadrature error estimate.
pub fn cdf_gamma_i_with_error(
    scenario: ScenarioId,
    p: &SystemParams,
    y: f64,
) -> Result<(f64, f64)> {
    check_nonneg("y_tilde", y)?;
    p.validate()?;
    if y == 0.0 {
        return Ok((blocking_probability(scenario, p)?, 0.0));
    }
    if y.is_infinite() {
        return Ok((1.0, 0.0));
    }
    let (v, e) = match scenario {
        ScenarioId::S1 => s1_cdf_gamma_i(p, y)?,
        ScenarioId::S2 => s2_cdf_gamma_i(p, y)?,
        ScenarioId::S3 => match Scenario3Shape::new(p) {
            Some(shape) => (shape.cdf(y)?, 0.0),
            None => (1.0, 0.0),
        },
        ScenarioId::S4 => {
            let pt = power_s4(p).pt;
            if pt <= 0.0 {
                (1.0, 0.0)
            } else {
                (s4_cdf_gamma_i(p, pt, y), 0.0)
            }
        }
        ScenarioId::S5 => return Err(unsupported("cdf_gamma_i", scenario)),
    };
    Ok((v.clamp(0.0, 1.0), e))
}

pub fn cdf_gamma_i(scenario: ScenarioId, p: &SystemParams, y: f64) -> Result<f64> {
    Ok(cdf_gamma_i_with_error(scenario, p, y)?.0)
}

/// `F_γI(ỹ)` through the generic mixing integral over `g_ps`, using
/// [`cdf_gamma`]. Independent of the per-scenario simplifications; used to
/// cross-check them.
pub fn cdf_gamma_i_via_gamma(scenario: ScenarioId, p: &SystemParams, y: f64) -> Result<f64> {
    check_nonneg("y_tilde", y)?;
    if y == 0.0 {
        return blocking_probability(scenario, p);
    }
    let mut err = None;
    let integral = mixing_mean(p, |v| {
        match cdf_gamma(scenario, p, y * (p.sigma2_s + p.pp * v)) {
            Ok(f) => f,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(integral.value)
}

/// Density of `γ_I` at `ỹ > 0` (continuous part; the blocking atom is excluded).
pub fn pdf_gamma_i_with_error(
    scenario: ScenarioId,
    p: &SystemParams,
    y: f64,
) -> Result<(f64, f64)> {
    if !(y > 0.0) {
        return Err(Error::Invalid(format!("pdf_gamma_i needs y_tilde > 0 (got {y})")));
    }
    p.validate()?;
    let (v, e) = match scenario {
        ScenarioId::S1 => s1_pdf_gamma_i(p, y)?,
        ScenarioId::S2 => s2_pdf_gamma_i(p, y)?,
        ScenarioId::S3 => match Scenario3Shape::new(p) {
            Some(shape) => (shape.pdf(y)?, 0.0),
            None => (0.0, 0.0),
        },
        ScenarioId::S4 => {
            let pt = power_s4(p).pt;
            if pt <= 0.0 {
                (0.0, 0.0)
            } else {
                (s4_pdf_gamma_i(p, pt, y), 0.0)
            }
        }
        ScenarioId::S5 => return Err(unsupported("pdf_gamma_i", scenario)),
    };
    Ok((v.max(0.0), e))
}

pub fn pdf_gamma_i(scenario: ScenarioId, p: &SystemParams, y: f64) -> Result<f64> {
    Ok(pdf_gamma_i_with_error(scenario, p, y)?.0)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Invalid("empty grid".into()));
    }
    if grid.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::Invalid("grid values must be finite and nonnegative".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `F_C(y) = F_γI(2^y - 1)` on a capacity grid (bits/s/Hz).
///
/// S5 has no analytic form; use [`crate::mc::run`] for it.
pub fn capacity_cdf(scenario: ScenarioId, p: &SystemParams, y_grid: &[f64]) -> Result<DistributionCurve> {
    check_grid(y_grid)?;
    if scenario == ScenarioId::S5 {
        return Err(unsupported("analytic capacity_cdf", scenario));
    }
    let mut values = Vec::with_capacity(y_grid.len());
    let mut quad_error: f64 = 0.0;
    for &y in y_grid {
        let (v, e) = cdf_gamma_i_with_error(scenario, p, y.exp2() - 1.0)?;
        values.push(v);
        quad_error = quad_error.max(e);
    }
    // Quadrature noise must not break monotonicity.
    for i in 1..values.len() {
        if values[i] < values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    Ok(DistributionCurve {
        abscissae: y_grid.to_vec(),
        values,
        kind: CurveKind::CdfCapacity,
        scenario,
        quad_error,
    })
}

/// Density of the capacity, `f_C(y) = ln2 · 2^y · f_γI(2^y - 1)`, for `y > 0`.
pub fn capacity_pdf(scenario: ScenarioId, p: &SystemParams, y_grid: &[f64]) -> Result<DistributionCurve> {
    check_grid(y_grid)?;
    if y_grid[0] <= 0.0 {
        return Err(Error::Invalid("capacity pdf grid must start above 0".into()));
    }
    let mut values = Vec::with_capacity(y_grid.len());
    let mut quad_error: f64 = 0.0;
    for &y in y_grid {
        let t = y.exp2();
        let (v, e) = pdf_gamma_i_with_error(scenario, p, t - 1.0)?;
        let jac = std::f64::consts::LN_2 * t;
        values.push(v * jac);
        quad_error = quad_error.max(e * jac);
    }
    Ok(DistributionCurve {
        abscissae: y_grid.to_vec(),
        values,
        kind: CurveKind::PdfCapacity,
        scenario,
        quad_error,
    })
}

/// Mean capacity `∫ log2(1 + x) f_γI(x) dx`.
pub fn mean_capacity(scenario: ScenarioId, p: &SystemParams) -> Result<f64> {
    p.validate()?;
    if blocking_probability(scenario, p)? >= 1.0 {
        return Ok(0.0);
    }
    match scenario {
        ScenarioId::S4 => {
            // Single integral in t = 1 + x.
            let pt = power_s4(p).pt;
            let ps = pt * p.omega_s;
            let r = integrate(
                |t| {
                    let den = p.pp * p.omega_ps * (t - 1.0) + ps;
                    (p.sigma2_s / den + pt * p.pp * p.omega_s * p.omega_ps / (den * den))
                        * t.ln()
                        * (-(t - 1.0) * p.sigma2_s / ps).exp()
                },
                1.0,
                f64::INFINITY,
                &DIST_QUAD,
            )?;
            Ok(r.value / std::f64::consts::LN_2)
        }
        ScenarioId::S5 => Err(unsupported("analytic mean_capacity", scenario)),
        _ => {
            let mut err = None;
            let outer = QuadSpec {
                abs_tol: 1e-10,
                rel_tol: 1e-9,
                ..DIST_QUAD
            };
            let r = integrate(
                |x| {
                    if x <= 0.0 {
                        return 0.0;
                    }
                    match pdf_gamma_i(scenario, p, x) {
                        Ok(f) => x.ln_1p() * f,
                        Err(e) => {
                            err.get_or_insert(e);
                            0.0
                        }
                    }
                },
                0.0,
                f64::INFINITY,
                &outer,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok(r.value / std::f64::consts::LN_2)
        }
    }
}

/// Mean capacity through `∫_0^∞ (1 - F_C(y)) dy`, written in `x = 2^y - 1`.
pub fn mean_capacity_from_cdf(scenario: ScenarioId, p: &SystemParams) -> Result<f64> {
    let mut err = None;
    let outer = QuadSpec {
        abs_tol: 1e-10,
        rel_tol: 1e-9,
        ..DIST_QUAD
    };
    let r = integrate(
        |x| {
            if x <= 0.0 {
                return 0.0;
            }
            match cdf_gamma_i(scenario, p, x) {
                Ok(f) => (1.0 - f) / (1.0 + x),
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        f64::INFINITY,
        &outer,
    )?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r.value / std::f64::consts::LN_2)
}

/// Probability that the SU is blocked (`P_t = 0`).
pub fn blocking_probability(scenario: ScenarioId, p: &SystemParams) -> Result<f64> {
    p.validate()?;
    let c2 = p.c2();
    Ok(match scenario {
        ScenarioId::S1 | ScenarioId::S2 => -(-c2).exp_m1(),
        ScenarioId::S3 | ScenarioId::S4 => {
            if s34_blocked(p) {
                1.0
            } else {
                0.0
            }
        }
        ScenarioId::S5 => s5_blocking_probability(p)?.probability,
    })
}

/// S3/S4 blocking condition `α <= 1 - e^{-c2}`.
pub fn s34_blocked(p: &SystemParams) -> bool {
    p.alpha <= -(-p.c2()).exp_m1()
}

/// Threshold on the estimated PU gain below which S5 blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct S5Blocking {
    /// Noncentrality at which `Pr(X >= β) = 1 - α`.
    pub lambda_star: f64,
    /// The corresponding estimated gain `g*`.
    pub g_star: f64,
    /// `1 - e^{-g*/Ω_p}`
    pub probability: f64,
}

/// S5 blocking: find `λ*` with `Pr(X >= 2c2/(1-ρ²) | λ*) = 1 - α`, map it back
/// to `ĝ_p = g*` and return `Pr(ĝ_p < g*)`.
pub fn s5_blocking_probability(p: &SystemParams) -> Result<S5Blocking> {
    p.validate()?;
    let one_minus = 1.0 - p.rho * p.rho;
    let beta = 2.0 * p.c2() / one_minus;
    let outage = |lambda: f64| -> Result<f64> { Ok(ncx2_cdf(lambda, beta)? - p.alpha) };
    if outage(0.0)? <= 0.0 {
        return Ok(S5Blocking {
            lambda_star: 0.0,
            g_star: 0.0,
            probability: 0.0,
        });
    }
    if p.rho == 0.0 {
        // Estimates carry no information; λ is always 0.
        return Ok(S5Blocking {
            lambda_star: f64::INFINITY,
            g_star: f64::INFINITY,
            probability: 1.0,
        });
    }
    let mut hi = beta.max(1.0);
    let mut grow = 0;
    while outage(hi)? > 0.0 {
        hi *= 2.0;
        grow += 1;
        if grow > 60 {
            return Err(Error::Numerics(crate::numerics::NumericsError::BracketNotFound {
                x0: beta.max(1.0),
                expansions: grow,
                lo: 0.0,
                hi,
            }));
        }
    }
    let mut err = None;
    let lambda_star = find_root(
        |l| {
            outage(l).unwrap_or_else(|e| {
                err.get_or_insert(e);
                f64::NAN
            })
        },
        0.0,
        hi,
        &RootSpec {
            abs_tol: 1e-12 * hi.max(1.0),
            max_iterations: 300,
        },
    );
    if let Some(e) = err {
        return Err(e);
    }
    let lambda_star = lambda_star?;
    let g_star = lambda_star * p.omega_p * one_minus / (2.0 * p.rho * p.rho);
    Ok(S5Blocking {
        lambda_star,
        g_star,
        probability: -(-g_star / p.omega_p).exp_m1(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_params_from_ratios, ParamOverrides};

    fn defaults(c1: f64, c2: f64) -> SystemParams {
        make_params_from_ratios(c1, c2, &ParamOverrides::default()).unwrap()
    }

    #[test]
    fn blocking_closed_forms() {
        let p = defaults(0.1, 0.1);
        let b = blocking_probability(ScenarioId::S1, &p).unwrap();
        assert!((b - 0.095_163).abs() < 1e-6);
        assert_eq!(b, blocking_probability(ScenarioId::S2, &p).unwrap());
        assert_eq!(blocking_probability(ScenarioId::S3, &p).unwrap(), 0.0);
        let tiny = defaults(0.1, 1e-9);
        assert!(blocking_probability(ScenarioId::S1, &tiny).unwrap() < 2e-9);
    }

    #[test]
    fn s1_gamma_cdf_atom() {
        let p = defaults(0.1, 0.1);
        let near = cdf_gamma(ScenarioId::S1, &p, 1e-12).unwrap();
        assert!((near - (1.0 - (-0.1f64).exp())).abs() < 1e-9);
    }

    #[test]
    fn s4_gamma_median() {
        let p = defaults(0.1, 0.1);
        let pt = power_s4(&p).pt;
        let v = cdf_gamma(ScenarioId::S4, &p, pt * p.omega_s * 2f64.ln()).unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn s4_closed_form_at_unit_sinr() {
        let p = defaults(0.1, 0.1);
        let pt = power_s4(&p).pt;
        let expect = 1.0
            - pt * p.omega_s / (p.pp * p.omega_ps + pt * p.omega_s) * (-p.sigma2_s / (pt * p.omega_s)).exp();
        assert!((cdf_gamma_i(ScenarioId::S4, &p, 1.0).unwrap() - expect).abs() < 1e-15);
        assert!((expect - 0.9020).abs() < 1e-3);
    }

    #[test]
    fn s3_closed_form_matches_mixing_integral() {
        let p = defaults(0.1, 0.1);
        for i in 1..=50 {
            let y = 0.1 * i as f64;
            let a = cdf_gamma_i(ScenarioId::S3, &p, y).unwrap();
            let b = cdf_gamma_i_via_gamma(ScenarioId::S3, &p, y).unwrap();
            assert!((a - b).abs() < 1e-7, "y={y}: {a} vs {b}");
        }
    }

    #[test]
    fn s1_and_s2_match_mixing_integral() {
        let p = defaults(0.1, 0.1);
        for &y in &[0.05, 0.5, 1.0, 3.0, 20.0] {
            for s in [ScenarioId::S1, ScenarioId::S2] {
                let a = cdf_gamma_i(s, &p, y).unwrap();
                let b = cdf_gamma_i_via_gamma(s, &p, y).unwrap();
                assert!((a - b).abs() < 1e-8, "{s} y={y}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn pdf_matches_finite_difference() {
        let h = 1e-4;
        for c1 in [0.01, 0.1, 0.9] {
            let p = defaults(c1, 0.1);
            for s in [ScenarioId::S1, ScenarioId::S2, ScenarioId::S3, ScenarioId::S4] {
                for &y in &[0.5, 1.0, 2.0] {
                    let fd = (cdf_gamma_i(s, &p, y + h).unwrap() - cdf_gamma_i(s, &p, y - h).unwrap())
                        / (2.0 * h);
                    let f = pdf_gamma_i(s, &p, y).unwrap();
                    assert!((fd - f).abs() < 1e-4, "{s} c1={c1} y={y}: fd {fd} pdf {f}");
                }
            }
        }
    }

    #[test]
    fn s3_pdf_nonnegative() {
        let p = defaults(0.1, 0.1);
        let shape = Scenario3Shape::new(&p).unwrap();
        for i in 1..=200 {
            let y = 0.05 * i as f64;
            assert!(shape.pdf(y).unwrap() >= 0.0);
            assert!(shape.r(y) > 0.0);
        }
    }

    #[test]
    fn s3_derivatives_match_finite_differences() {
        let p = defaults(0.1, 0.1);
        let sh = Scenario3Shape::new(&p).unwrap();
        let h = 1e-6;
        for &y in &[0.3, 1.0, 4.0] {
            let ds = (sh.s(y + h) - sh.s(y - h)) / (2.0 * h);
            let dr = (sh.r(y + h) - sh.r(y - h)) / (2.0 * h);
            let dh = (sh.h(y + h) - sh.h(y - h)) / (2.0 * h);
            assert!((ds - sh.s_prime(y)).abs() < 1e-6);
            assert!((dr - sh.r_prime(y)).abs() < 1e-5 * dr.abs().max(1.0));
            assert!((dh - sh.h_prime(y)).abs() < 1e-5 * dh.abs().max(1.0));
        }
    }

    #[test]
    fn blocked_scenarios_have_unit_cdf() {
        let p = defaults(0.1, 0.5);
        for s in [ScenarioId::S3, ScenarioId::S4] {
            assert_eq!(blocking_probability(s, &p).unwrap(), 1.0);
            assert_eq!(cdf_gamma_i(s, &p, 2.0).unwrap(), 1.0);
            assert_eq!(mean_capacity(s, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn s5_is_unsupported_analytically() {
        let p = defaults(0.1, 0.1);
        assert!(matches!(
            capacity_cdf(ScenarioId::S5, &p, &[0.0, 1.0]),
            Err(Error::Unsupported { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        let p = defaults(0.1, 0.1);
        assert!(capacity_cdf(ScenarioId::S4, &p, &[]).is_err());
        assert!(capacity_cdf(ScenarioId::S4, &p, &[1.0, 0.5]).is_err());
        assert!(capacity_cdf(ScenarioId::S4, &p, &[-1.0, 0.5]).is_err());
    }
}
