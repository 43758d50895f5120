//! System parameters, channel draws and per-draw SINR / capacity.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid system parameters: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("unknown scenario '{0}' (expected S1..S5)")]
    UnknownScenario(String),
}

/// Channel-knowledge scenario at the secondary transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScenarioId {
    /// Exact `g_p` and `g_sp`.
    S1,
    /// Exact `g_p`, mean of `g_sp`.
    S2,
    /// Mean of `g_p`, exact `g_sp`.
    S3,
    /// Means only.
    S4,
    /// Noisy estimates of `g_p` and `g_sp`.
    S5,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [Self::S1, Self::S2, Self::S3, Self::S4, Self::S5];

    pub fn index(self) -> usize {
        match self {
            Self::S1 => 1,
            Self::S2 => 2,
            Self::S3 => 3,
            Self::S4 => 4,
            Self::S5 => 5,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.index())
    }
}

impl FromStr for ScenarioId {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" | "1" => Ok(Self::S1),
            "S2" | "2" => Ok(Self::S2),
            "S3" | "3" => Ok(Self::S3),
            "S4" | "4" => Ok(Self::S4),
            "S5" | "5" => Ok(Self::S5),
            _ => Err(ModelError::UnknownScenario(s.to_string())),
        }
    }
}

/// Static system constants. All values are linear scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// PU transmit power.
    pub pp: f64,
    /// SU maximum transmit power.
    pub pm: f64,
    /// Noise variance at the PU receiver.
    pub sigma2_p: f64,
    /// Noise variance at the SU receiver.
    pub sigma2_s: f64,
    /// Mean gain PU-Tx → PU-Rx.
    pub omega_p: f64,
    /// Mean gain SU-Tx → SU-Rx.
    pub omega_s: f64,
    /// Mean gain PU-Tx → SU-Rx.
    pub omega_ps: f64,
    /// Mean gain SU-Tx → PU-Rx.
    pub omega_sp: f64,
    /// PU SINR threshold.
    pub gamma_t: f64,
    /// Allowed probability of violating the PU SINR threshold.
    pub alpha: f64,
    /// Correlation between true and estimated channel amplitudes.
    pub rho: f64,
}

/// The two ratios that summarise a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRatios {
    /// `Ω_sp / Ω_s`
    pub c1: f64,
    /// `γ_T σ_p² / (P_p Ω_p)`
    pub c2: f64,
}

/// Optional replacements applied on top of the default parameter set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub pp: Option<f64>,
    pub pm: Option<f64>,
    pub sigma2_p: Option<f64>,
    pub sigma2_s: Option<f64>,
    pub omega_p: Option<f64>,
    pub omega_s: Option<f64>,
    pub omega_ps: Option<f64>,
    pub omega_sp: Option<f64>,
    pub gamma_t: Option<f64>,
    pub alpha: Option<f64>,
    pub rho: Option<f64>,
}

impl ParamOverrides {
    pub fn apply(&self, p: &mut SystemParams) {
        let pairs: [(&Option<f64>, &mut f64); 11] = [
            (&self.pp, &mut p.pp),
            (&self.pm, &mut p.pm),
            (&self.sigma2_p, &mut p.sigma2_p),
            (&self.sigma2_s, &mut p.sigma2_s),
            (&self.omega_p, &mut p.omega_p),
            (&self.omega_s, &mut p.omega_s),
            (&self.omega_ps, &mut p.omega_ps),
            (&self.omega_sp, &mut p.omega_sp),
            (&self.gamma_t, &mut p.gamma_t),
            (&self.alpha, &mut p.alpha),
            (&self.rho, &mut p.rho),
        ];
        for (src, dst) in pairs {
            if let Some(v) = src {
                *dst = *v;
            }
        }
    }
}

/// Converts decibels to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Mean gain of the PU and SU direct links relative to noise (5 dB).
pub const DEFAULT_DIRECT_SNR_DB: f64 = 5.0;
pub const DEFAULT_ALPHA: f64 = 0.1;
pub const DEFAULT_RHO: f64 = 0.9;

impl SystemParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let mut errs = Vec::new();
        let positive = [
            ("pp", self.pp),
            ("pm", self.pm),
            ("sigma2_p", self.sigma2_p),
            ("sigma2_s", self.sigma2_s),
            ("omega_p", self.omega_p),
            ("omega_s", self.omega_s),
            ("omega_ps", self.omega_ps),
            ("omega_sp", self.omega_sp),
            ("gamma_t", self.gamma_t),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be positive and finite (got {v})"));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            errs.push(format!("alpha must lie in (0, 1) (got {})", self.alpha));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            errs.push(format!("rho must lie in [0, 1) (got {})", self.rho));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ModelError::Validation(errs))
        }
    }

    pub fn ratios(&self) -> DerivedRatios {
        DerivedRatios {
            c1: self.c1(),
            c2: self.c2(),
        }
    }

    pub fn c1(&self) -> f64 {
        self.omega_sp / self.omega_s
    }

    pub fn c2(&self) -> f64 {
        self.gamma_t * self.sigma2_p / (self.pp * self.omega_p)
    }

    /// Returns a copy with a different outage tolerance.
    pub fn with_alpha(mut self, alpha: f64) -> Result<Self, ModelError> {
        self.alpha = alpha;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self, ModelError> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }
}

/// Builds the default parameter set for given `c1`, `c2`:
/// unit powers and noise, 5 dB direct-link mean SNR, `α = 0.1`, `ρ = 0.9`,
/// and `Ω_ps = Ω_sp`. Overrides are applied afterwards and re-validated.
pub fn make_params_from_ratios(
    c1: f64,
    c2: f64,
    overrides: &ParamOverrides,
) -> Result<SystemParams, ModelError> {
    let mut errs = Vec::new();
    if !(c1 > 0.0 && c1.is_finite()) {
        errs.push(format!("c1 must be positive (got {c1})"));
    }
    if !(c2 > 0.0 && c2.is_finite()) {
        errs.push(format!("c2 must be positive (got {c2})"));
    }
    if !errs.is_empty() {
        return Err(ModelError::Validation(errs));
    }
    let sigma2 = 1.0;
    let pp = 1.0;
    let omega = db_to_linear(DEFAULT_DIRECT_SNR_DB) * sigma2;
    let omega_sp = c1 * omega;
    let mut p = SystemParams {
        pp,
        pm: 1.0,
        sigma2_p: sigma2,
        sigma2_s: sigma2,
        omega_p: omega,
        omega_s: omega,
        omega_ps: omega_sp,
        omega_sp,
        gamma_t: c2 * pp * omega / sigma2,
        alpha: DEFAULT_ALPHA,
        rho: DEFAULT_RHO,
    };
    overrides.apply(&mut p);
    p.validate()?;
    Ok(p)
}

/// One realisation of the four link gains, plus the estimates used by S5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub g_p: f64,
    pub g_s: f64,
    pub g_ps: f64,
    pub g_sp: f64,
    pub g_p_hat: Option<f64>,
    pub g_sp_hat: Option<f64>,
}

impl ChannelDraw {
    pub fn new(g_p: f64, g_s: f64, g_ps: f64, g_sp: f64) -> Self {
        Self {
            g_p,
            g_s,
            g_ps,
            g_sp,
            g_p_hat: None,
            g_sp_hat: None,
        }
    }
}

/// SINR at the SU receiver, `P_t g_s / (P_p g_ps + σ_s²)`.
pub fn su_sinr(params: &SystemParams, draw: &ChannelDraw, pt: f64) -> f64 {
    if pt <= 0.0 {
        return 0.0;
    }
    pt * draw.g_s / (params.pp * draw.g_ps + params.sigma2_s)
}

/// SINR at the PU receiver, `P_p g_p / (P_s g_sp + σ_p²)`.
pub fn pu_sinr(params: &SystemParams, draw: &ChannelDraw, ps: f64) -> f64 {
    params.pp * draw.g_p / (ps * draw.g_sp + params.sigma2_p)
}

/// Instantaneous capacity in bits/s/Hz.
pub fn capacity(gamma_i: f64) -> f64 {
    (1.0 + gamma_i).log2()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> SystemParams {
        SystemParams {
            pp: 1.0,
            pm: 1.0,
            sigma2_p: 1.0,
            sigma2_s: 1.0,
            omega_p: 1.0,
            omega_s: 1.0,
            omega_ps: 1.0,
            omega_sp: 1.0,
            gamma_t: 1.0,
            alpha: 0.1,
            rho: 0.9,
        }
    }

    #[test]
    fn ratio_construction() {
        let p = make_params_from_ratios(0.1, 0.1, &ParamOverrides::default()).unwrap();
        assert!((p.omega_sp - 0.316_227_8).abs() < 1e-7);
        assert!((p.gamma_t - 0.316_227_8).abs() < 1e-7);
        assert_eq!(p.omega_ps, p.omega_sp);
        let q = make_params_from_ratios(1.0, 1.0, &ParamOverrides::default()).unwrap();
        assert_eq!(q.omega_sp, q.omega_s);
        assert!((q.gamma_t - q.pp * q.omega_p / q.sigma2_p).abs() < 1e-15);
    }

    #[test]
    fn ratio_round_trip() {
        for &(c1, c2) in &[(0.01, 0.1), (0.9, 0.5), (3.0, 0.99), (1e-3, 1e-3)] {
            let r = make_params_from_ratios(c1, c2, &ParamOverrides::default())
                .unwrap()
                .ratios();
            assert!((r.c1 - c1).abs() < 1e-12 && (r.c2 - c2).abs() < 1e-12);
        }
    }

    #[test]
    fn overrides_are_applied_and_validated() {
        let o = ParamOverrides {
            omega_ps: Some(2.0),
            alpha: Some(0.3),
            ..Default::default()
        };
        let p = make_params_from_ratios(0.1, 0.1, &o).unwrap();
        assert_eq!(p.omega_ps, 2.0);
        assert_eq!(p.alpha, 0.3);
        let bad = ParamOverrides {
            rho: Some(1.0),
            alpha: Some(0.0),
            pm: Some(-1.0),
            ..Default::default()
        };
        match make_params_from_ratios(0.1, 0.1, &bad) {
            Err(ModelError::Validation(list)) => assert_eq!(list.len(), 3),
            other => panic!("{other:?}"),
        }
        assert!(make_params_from_ratios(0.0, 0.1, &ParamOverrides::default()).is_err());
    }

    #[test]
    fn sinr_and_capacity() {
        let p = unit();
        let d = ChannelDraw::new(1.0, 2.0, 1.0, 1.0);
        assert_eq!(su_sinr(&p, &d, 0.0), 0.0);
        assert_eq!(su_sinr(&p, &d, 1.0), 1.0);
        let no_int = ChannelDraw::new(1.0, 2.0, 0.0, 1.0);
        assert_eq!(su_sinr(&p, &no_int, p.pm), p.pm * 2.0);
        assert_eq!(capacity(0.0), 0.0);
        assert_eq!(capacity(1.0), 1.0);
        assert_eq!(capacity(3.0), 2.0);
        assert_eq!(pu_sinr(&p, &d, 0.0), 1.0);
        assert_eq!(pu_sinr(&p, &d, 1.0), 0.5);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let v = pu_sinr(&p, &d, i as f64 * 0.5);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!("s3".parse::<ScenarioId>().unwrap(), ScenarioId::S3);
        assert_eq!(ScenarioId::S5.to_string(), "S5");
        assert!("S6".parse::<ScenarioId>().is_err());
    }
}
