//! Dynamic panel specialization.
//!
//! The model is `Δy_it = θ Δx_it + γ_1 Δy_{i,t-1} + ... + γ_k Δy_{i,t-k} + Δv_it`
//! in first differences. Candidates differ in the lag order they estimate and
//! in whether `x` is treated as predetermined (instruments `x_{t-1}`) or
//! strictly exogenous (instruments `x_{t-1}, x_t`). Estimation is TSLS on
//! block-diagonal per-period instruments.
//!
//! Periods are 1-based throughout this crate: `t = 1..=T`, matching column
//! `t - 1` of the level matrices.

mod bias;
mod build;
mod fit;
mod fixed;
mod gfic;
mod spec;
mod target;

pub use bias::{dpanel_bias_correct, estimate_dpanel_bias, strict_permutation, DpanelBias};
pub use build::{
    build_instruments, build_outcome, build_regressors, stack_candidate, FitOptions, Stacked,
};
pub use fit::{fit_candidate, robust_vcov, scores, tsls_fit, DpanelFit, TslsFit};
pub use fixed::{fixed_instrument_gfic, FixedInstrumentResult};
pub use gfic::{gfic_dpanel, CandidateResult, DpanelGfic, SamplerParts};
pub use spec::{parse_candidate, standard_candidates, DpanelSpec, Exog};
pub use target::{long_run, long_run_gradient, Target};

use gfic_engine::EngineError;
use gfic_panel::PanelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DpanelError {
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("too few periods: need at least {need}, have {got}")]
    TooFewPeriods { need: usize, got: usize },
    #[error("singular {what}: {detail}")]
    SingularDesign { what: String, detail: String },
    #[error("long-run effect undefined: 1 - sum(gamma) = {0:e}")]
    UnitRootTarget(f64),
    #[error("invalid candidate: {0}")]
    InvalidCandidate(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl DpanelError {
    pub(crate) fn singular(what: &str, e: impl std::fmt::Display) -> Self {
        DpanelError::SingularDesign {
            what: what.to_string(),
            detail: e.to_string(),
        }
    }
}
