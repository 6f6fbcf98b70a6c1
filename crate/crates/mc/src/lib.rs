//! Monte Carlo harness: data generating processes, loss metrics with
//! jackknife standard errors, a deterministic grid runner, and the named
//! designs for the dynamic panel, RE/FE and slope-heterogeneity studies.
//!
//! Replication `r` of grid cell `g` draws from RNG substream `(seed, g, r)`,
//! so results do not depend on thread count or on which other cells run.

mod design;
mod dgp;
mod loss;
pub mod named;

pub use design::{
    run_design, run_design_with, CellResult, McDesign, McResult, ProcEstimate, ProcedureSummary,
    RepOutput, SelectionFreq,
};
pub use dgp::{
    draw_dpanel, draw_dpanel_full, draw_refe, draw_slopehet, DpanelDgp, DpanelDraw, ReFeDgp,
    SlopeHetDgp,
};
pub use loss::{jackknife_se, loss_metrics, metric_value, LossValue, Metric};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("covariance of the generating process is not positive semi-definite (smallest eigenvalue {0:e})")]
    NonPsdCovariance(f64),
    #[error("lag coefficients sum to {0}; need |sum| < 1")]
    NonStationary(f64),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error("trimming at {m} discarded all {n} replications")]
    AllTrimmed { m: f64, n: usize },
    #[error("no replications to summarize")]
    Empty,
    #[error("unknown design `{0}` (expected table1, lag-exog, refe or slopehet)")]
    UnknownDesign(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
