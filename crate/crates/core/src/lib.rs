//! Secondary-user transmit power, capacity distributions and blocking in an
//! underlay cognitive-radio link sharing spectrum with one primary link.
//!
//! The primary receiver is protected by an SINR threshold. Depending on what
//! the secondary transmitter knows about the PU-Tx→PU-Rx gain `g_p` and the
//! SU-Tx→PU-Rx gain `g_sp` (exact values, means only, or noisy estimates),
//! the threshold is enforced exactly or with probability `1 - α`:
//!
//! | scenario | `g_p`    | `g_sp`   |
//! |----------|----------|----------|
//! | S1       | exact    | exact    |
//! | S2       | exact    | mean     |
//! | S3       | mean     | exact    |
//! | S4       | mean     | mean     |
//! | S5       | estimate | estimate |
//!
//! Modules:
//! - [`specfun`]: `E1`, `I0`, `1F1`, Whittaker `M`, noncentral χ² (2 dof)
//! - [`numerics`]: adaptive quadrature, Brent root finding, bracketing
//! - [`model`]: parameters, channel draws, SINR and capacity
//! - [`policy`]: per-scenario SU power
//! - [`dist`]: analytic CDFs/PDFs, mean capacity, blocking probability
//! - [`mc`]: Monte Carlo oracle

pub mod dist;
pub mod mc;
pub mod model;
pub mod numerics;
pub mod policy;
pub mod specfun;

pub use dist::{CurveKind, DistributionCurve};
pub use mc::{McConfig, McSummary};
pub use model::{make_params_from_ratios, ChannelDraw, ParamOverrides, ScenarioId, SystemParams};
pub use policy::PolicyOutput;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Specfun(#[from] specfun::SpecfunError),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error("{operation} is not available for scenario {scenario}")]
    Unsupported {
        operation: &'static str,
        scenario: ScenarioId,
    },
    #[error("internal consistency check failed: {0}")]
    Consistency(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
