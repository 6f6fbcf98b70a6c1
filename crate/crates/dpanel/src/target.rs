use std::fmt;
use std::str::FromStr;

use gfic_engine::TargetFunction;
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::DpanelError;

const UNIT_ROOT_TOL: f64 = 1e-8;

/// Target parameter over `β = (θ, γ_1, ..., γ_ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// `θ`.
    #[default]
    ShortRun,
    /// `θ / (1 - Σγ)`.
    LongRun,
}

impl Target {
    pub fn value(self, beta: &DVector<f64>) -> Result<f64, DpanelError> {
        match self {
            Target::ShortRun => Ok(beta[0]),
            Target::LongRun => long_run(beta[0], &beta.as_slice()[1..]),
        }
    }

    pub fn gradient(self, beta: &DVector<f64>) -> Result<DVector<f64>, DpanelError> {
        match self {
            Target::ShortRun => {
                let mut g = DVector::zeros(beta.len());
                g[0] = 1.0;
                Ok(g)
            }
            Target::LongRun => long_run_gradient(beta[0], &beta.as_slice()[1..]),
        }
    }

    /// The target as a generic function over `dim` coefficients. The
    /// long-run value is NaN at a unit root.
    pub fn function(self) -> TargetFunction {
        TargetFunction::new(
            self.to_string(),
            move |b| self.value(b).unwrap_or(f64::NAN),
            move |b| {
                self.gradient(b)
                    .unwrap_or_else(|_| DVector::from_element(b.len(), f64::NAN))
            },
        )
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::ShortRun => "short-run",
            Target::LongRun => "long-run",
        })
    }
}

impl FromStr for Target {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "short-run" | "sr" | "SR" => Ok(Target::ShortRun),
            "long-run" | "lr" | "LR" => Ok(Target::LongRun),
            other => Err(format!(
                "unknown target `{other}` (expected short-run or long-run)"
            )),
        }
    }
}

fn denominator(gamma: &[f64]) -> Result<f64, DpanelError> {
    let d = 1.0 - gamma.iter().sum::<f64>();
    if d.abs() < UNIT_ROOT_TOL {
        return Err(DpanelError::UnitRootTarget(d));
    }
    Ok(d)
}

/// `θ / (1 - Σγ)`.
pub fn long_run(theta: f64, gamma: &[f64]) -> Result<f64, DpanelError> {
    Ok(theta / denominator(gamma)?)
}

/// `(1 - Σγ)^{-2} [1 - Σγ, θ ι']`.
pub fn long_run_gradient(theta: f64, gamma: &[f64]) -> Result<DVector<f64>, DpanelError> {
    let d = denominator(gamma)?;
    let mut g = DVector::from_element(gamma.len() + 1, theta / (d * d));
    g[0] = 1.0 / d;
    Ok(g)
}
