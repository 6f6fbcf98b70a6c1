use std::fmt;
use std::str::FromStr;

use gfic_numerics::stats::median;
use serde::{Deserialize, Serialize};

use crate::McError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Rmse,
    /// Median absolute deviation from the truth.
    Mad,
    /// Mean squared error over replications with `|estimate| ≤ m`.
    TrimmedMse {
        m: f64,
    },
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Rmse => f.write_str("rmse"),
            Metric::Mad => f.write_str("mad"),
            Metric::TrimmedMse { m } => write!(f, "trimmed-mse-{m}"),
        }
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase();
        match s.as_str() {
            "rmse" => Ok(Metric::Rmse),
            "mad" => Ok(Metric::Mad),
            _ => s
                .strip_prefix("trimmed-mse-")
                .and_then(|m| m.parse::<f64>().ok())
                .filter(|m| *m > 0.0)
                .map(|m| Metric::TrimmedMse { m })
                .ok_or_else(|| {
                    format!("unknown metric `{s}` (expected rmse, mad or trimmed-mse-<M>)")
                }),
        }
    }
}

/// Value of one metric and the number of replications it discarded.
pub fn metric_value(
    metric: Metric,
    errors: &[f64],
    estimates: &[f64],
) -> Result<(f64, usize), McError> {
    if errors.is_empty() {
        return Err(McError::Empty);
    }
    match metric {
        Metric::Rmse => Ok((
            (errors.iter().map(|e| e * e).sum::<f64>() / errors.len() as f64).sqrt(),
            0,
        )),
        Metric::Mad => Ok((
            median(&errors.iter().map(|e| e.abs()).collect::<Vec<_>>()),
            0,
        )),
        Metric::TrimmedMse { m } => {
            let kept: Vec<f64> = errors
                .iter()
                .zip(estimates)
                .filter(|(_, est)| est.abs() <= m)
                .map(|(e, _)| e * e)
                .collect();
            if kept.is_empty() {
                return Err(McError::AllTrimmed { m, n: errors.len() });
            }
            Ok((
                kept.iter().sum::<f64>() / kept.len() as f64,
                errors.len() - kept.len(),
            ))
        }
    }
}

/// Number of blocks for the delete-a-block jackknife.
const JACKKNIFE_BLOCKS: usize = 20;

/// Delete-a-block jackknife standard error of `stat` over contiguous blocks
/// of replications. Returns `NaN` with fewer than two blocks' worth of data.
pub fn jackknife_se(n: usize, stat: impl Fn(&[usize]) -> Option<f64>) -> f64 {
    let g = JACKKNIFE_BLOCKS.min(n);
    if g < 2 {
        return f64::NAN;
    }
    let bounds: Vec<usize> = (0..=g).map(|b| b * n / g).collect();
    let mut vals = Vec::with_capacity(g);
    for b in 0..g {
        let keep: Vec<usize> = (0..bounds[b]).chain(bounds[b + 1]..n).collect();
        match stat(&keep) {
            Some(v) => vals.push(v),
            None => return f64::NAN,
        }
    }
    let gf = g as f64;
    let m = vals.iter().sum::<f64>() / gf;
    ((gf - 1.0) / gf * vals.iter().map(|v| (v - m).powi(2)).sum::<f64>()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossValue {
    pub metric: Metric,
    pub value: f64,
    pub mc_se: f64,
    pub discarded: usize,
}

pub fn loss_metrics(
    errors: &[f64],
    estimates: &[f64],
    which: &[Metric],
) -> Result<Vec<LossValue>, McError> {
    which
        .iter()
        .map(|&metric| {
            let (value, discarded) = metric_value(metric, errors, estimates)?;
            let mc_se = jackknife_se(errors.len(), |idx| {
                let e: Vec<f64> = idx.iter().map(|&i| errors[i]).collect();
                let x: Vec<f64> = idx.iter().map(|&i| estimates[i]).collect();
                metric_value(metric, &e, &x).ok().map(|v| v.0)
            });
            Ok(LossValue {
                metric,
                value,
                mc_se,
                discarded,
            })
        })
        .collect()
}
