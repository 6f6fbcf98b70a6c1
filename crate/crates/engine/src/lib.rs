//! Focused selection over GMM candidates.
//!
//! A candidate is a pair `(b, c)`: `b` marks which suspect parameters `γ`
//! are estimated (the rest are fixed at `γ0`), `c` marks which moment
//! conditions are used. The valid candidate estimates everything from the
//! `g` block only. For each candidate the engine estimates the asymptotic
//! variance and squared bias of a scalar target `μ = φ(θ, γ)` and picks the
//! candidate with the smallest estimated AMSE.
//!
//! Parameter vectors are ordered `(θ, γ)` with `s` protected and `r` suspect
//! entries; moment vectors are ordered `(g, h)` with `p` trusted and `q`
//! suspect entries.

mod bias;
mod score;
mod spec;
mod target;

pub use bias::{bias_correct_b, compute_psi, estimate_bias_params, BiasEstimate};
pub use score::{
    compute_k, compute_m, gfic_score, lambda_loadings, score_candidates, select, Criterion,
    GficScore, Loadings, Selectable,
};
pub use spec::{LimitObjects, SpecId};
pub use target::TargetFunction;

use gfic_numerics::LinalgError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("singular design for candidate `{label}`: {detail}")]
    SingularDesign { label: String, detail: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("no candidates to select from")]
    EmptyCandidateSet,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid limit objects: {0}")]
    InvalidLimitObjects(String),
}

impl EngineError {
    pub(crate) fn singular(label: &str, e: LinalgError) -> Self {
        EngineError::SingularDesign {
            label: label.to_string(),
            detail: e.to_string(),
        }
    }
}
