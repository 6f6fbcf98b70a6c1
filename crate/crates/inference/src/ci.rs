use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::sampler::check_alpha;
use crate::{region_points, InferenceError, LambdaSampler, RegionGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CiMethod {
    OneStep,
    TwoStep,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub method: CiMethod,
    /// `[α]` or `[α₁, α₂]`.
    pub alphas: Vec<f64>,
    pub draws: usize,
    /// Number of points searched over the region, for the 2-step interval.
    pub region_points: Option<usize>,
}

impl ConfidenceInterval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

fn bounds(mu_hat: f64, n: usize, a: f64, b: f64) -> (f64, f64) {
    let rn = (n as f64).sqrt();
    (mu_hat - b / rn, mu_hat - a / rn)
}

/// `[μ̂ - b̂(d̂)/√n, μ̂ - â(d̂)/√n]` with `d̂ = [δ̂; τ̂]` plugged in.
pub fn one_step_ci(
    s: &LambdaSampler,
    d_hat: &DVector<f64>,
    mu_hat: f64,
    n: usize,
    alpha: f64,
) -> Result<ConfidenceInterval, InferenceError> {
    let (a, b) = s.quantiles(d_hat, alpha)?;
    let (lower, upper) = bounds(mu_hat, n, a, b);
    Ok(ConfidenceInterval {
        lower,
        upper,
        method: CiMethod::OneStep,
        alphas: vec![alpha],
        draws: s.draws(),
        region_points: None,
    })
}

/// The conservative interval: widen over a `1 - α₁` confidence region for
/// `d`, each point using the `1 - α₂` quantiles of `Λ`.
pub fn two_step_ci(
    s: &LambdaSampler,
    d_hat: &DVector<f64>,
    mu_hat: f64,
    n: usize,
    alpha1: f64,
    alpha2: f64,
    grid: RegionGrid,
) -> Result<ConfidenceInterval, InferenceError> {
    check_alpha(alpha1)?;
    check_alpha(alpha2)?;
    let pts = region_points(d_hat, s.region_metric(), alpha1, grid)?;
    let (mut a_min, mut b_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        let (a, b) = s.quantiles(p, alpha2)?;
        a_min = a_min.min(a);
        b_max = b_max.max(b);
    }
    let (lower, upper) = bounds(mu_hat, n, a_min, b_max);
    Ok(ConfidenceInterval {
        lower,
        upper,
        method: CiMethod::TwoStep,
        alphas: vec![alpha1, alpha2],
        draws: s.draws(),
        region_points: Some(pts.len()),
    })
}
