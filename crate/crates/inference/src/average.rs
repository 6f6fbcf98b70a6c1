use std::collections::BTreeMap;

use serde::Serialize;

use crate::InferenceError;

/// Data-dependent weights over candidates, keyed by label.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AveragingWeights {
    weights: BTreeMap<String, f64>,
}

impl AveragingWeights {
    pub fn new(weights: BTreeMap<String, f64>) -> Result<Self, InferenceError> {
        if weights.is_empty() {
            return Err(InferenceError::Empty);
        }
        let sum: f64 = weights.values().sum();
        if sum.is_nan() || (sum - 1.0).abs() > 1e-12 {
            return Err(InferenceError::WeightsDoNotSumToOne { sum });
        }
        Ok(AveragingWeights { weights })
    }

    /// All weight on `selected`.
    pub fn indicator<S: AsRef<str>>(labels: &[S], selected: &str) -> Result<Self, InferenceError> {
        if !labels.iter().any(|l| l.as_ref() == selected) {
            return Err(InferenceError::KeyMismatch(format!(
                "`{selected}` is not a candidate"
            )));
        }
        let w = labels
            .iter()
            .map(|l| {
                (
                    l.as_ref().to_string(),
                    if l.as_ref() == selected { 1.0 } else { 0.0 },
                )
            })
            .collect();
        AveragingWeights::new(w)
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.weights.get(label).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// `Σ ω̂(b,c) μ̂(b,c)` over identical key sets.
pub fn averaging_mu(
    weights: &AveragingWeights,
    estimates: &BTreeMap<String, f64>,
) -> Result<f64, InferenceError> {
    if weights.weights.len() != estimates.len()
        || weights.weights.keys().any(|k| !estimates.contains_key(k))
    {
        let w: Vec<&str> = weights.weights.keys().map(String::as_str).collect();
        let e: Vec<&str> = estimates.keys().map(String::as_str).collect();
        return Err(InferenceError::KeyMismatch(format!(
            "weights {w:?}, estimates {e:?}"
        )));
    }
    Ok(weights.weights.iter().map(|(k, w)| w * estimates[k]).sum())
}
