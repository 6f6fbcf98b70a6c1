//! Inference for randomly weighted averages of candidate estimators.
//!
//! Every candidate satisfies `√n(μ̂_c - μ) → a_c'N + ℓ_c'd` for a common
//! normal vector `N ~ N(0, Ω)` and bias parameters `d = [δ; τ]`, and the
//! weights converge to functions of `N` and `d`. [`LambdaSampler`] simulates
//! the resulting limit `Λ(d)`; the interval builders turn its quantiles into
//! confidence intervals for `μ`.

mod average;
mod ci;
mod region;
mod sampler;
mod weights;

pub use average::{averaging_mu, AveragingWeights};
pub use ci::{one_step_ci, two_step_ci, CiMethod, ConfidenceInterval};
pub use region::{region_points, RegionGrid};
pub use sampler::{LambdaSampler, SamplerCandidate, MIN_DRAWS};
pub use weights::{DrawView, FixedWeights, FnRule, SelectRule, WeightFn, WeightRule};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error("Ω̂ is not positive semi-definite: {0}")]
    NonPsdOmega(String),
    #[error("confidence region metric ΨΩΨ' is unusable: {0}")]
    SingularRegionMetric(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("need at least {min} draws, got {got}")]
    TooFewDraws { min: usize, got: usize },
    #[error("weights sum to {sum}, not 1")]
    WeightsDoNotSumToOne { sum: f64 },
    #[error("candidate sets differ: {0}")]
    KeyMismatch(String),
    #[error("invalid level {0}: must lie in (0, 1)")]
    InvalidAlpha(f64),
    #[error("no candidates")]
    Empty,
}
