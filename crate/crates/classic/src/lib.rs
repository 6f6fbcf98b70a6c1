//! Two single-regressor panel examples where the choice is between a
//! precise estimator that may be biased and a robust one:
//!
//! * random-effects GLS versus fixed effects, when `x` may be correlated
//!   with the individual effect;
//! * pooled OLS versus the mean-group estimator, under slope heterogeneity.
//!
//! Regressors are assumed mean zero with any exogenous controls projected
//! out, so neither model has an intercept.

mod refe;
mod slopehet;

pub use refe::{
    omega_inverse, refe_average, refe_fit, refe_select, ReFeAverage, ReFeChoice, ReFeFit,
};
pub use slopehet::{slopehet_fit, slopehet_select, SlopeHetChoice, SlopeHetFit};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicError {
    #[error("need at least {need} periods, have {got}")]
    TooFewPeriods { need: usize, got: usize },
    #[error("no within-individual variation in x")]
    NoWithinVariation,
    #[error("x has no variation for individual `{id}`")]
    ZeroIndividualVariation { id: String },
    #[error("variance of the bias estimate is not positive ({0:e})")]
    DegenerateSigma(f64),
    #[error("no variation in x")]
    NoVariation,
}
