use std::sync::Arc;

use gfic_dpanel::gfic_dpanel;
use gfic_inference::{
    one_step_ci, two_step_ci, ConfidenceInterval, FixedWeights, LambdaSampler, SamplerCandidate,
    SelectRule, WeightRule,
};
use serde::Serialize;

use crate::output::{csv_text, num};
use crate::{CliError, Format, Method, RunConfig};

#[derive(Debug, Clone, Serialize)]
pub struct CiReport {
    pub weights: String,
    pub estimator: String,
    pub mu_hat: f64,
    pub n: usize,
    pub draws: usize,
    pub seed: u64,
    /// `[δ̂; τ̂]`.
    pub bias_estimate: Vec<f64>,
    pub intervals: Vec<ConfidenceInterval>,
}

pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let p = crate::input::load(cfg)?;
    let k = cfg.candidates.iter().map(|c| c.lag).max().unwrap_or(cfg.k);
    let g = gfic_dpanel(&p, &cfg.candidates, cfg.target, k, cfg.fit)?;
    if let Some((s, e)) = g.failures.first() {
        return Err(CliError::Numeric(format!(
            "candidate `{}` could not be estimated: {e}",
            s.label
        )));
    }
    let parts = g.sampler_parts();
    let cands: Vec<SamplerCandidate> = g
        .candidates
        .iter()
        .zip(&parts.loadings)
        .map(|(c, l)| SamplerCandidate::from_loadings(c.spec().label.clone(), l))
        .collect();
    let (rule, chosen): (Arc<dyn WeightRule>, usize) = if cfg.weights == "select" {
        (
            Arc::new(SelectRule(cfg.criterion)),
            g.select(cfg.criterion)?,
        )
    } else {
        let i = g
            .candidates
            .iter()
            .position(|c| c.spec().label == cfg.weights)
            .ok_or_else(|| CliError::Config(format!("no candidate `{}`", cfg.weights)))?;
        (Arc::new(FixedWeights::indicator(cands.len(), i)), i)
    };
    let sampler = LambdaSampler::new(&parts.omega, &parts.psi, cands, rule, cfg.draws, cfg.seed)?;
    let mu_hat = g.candidates[chosen].mu_hat;
    let n = g.valid.n();
    let mut intervals = Vec::new();
    if matches!(cfg.method, Method::OneStep | Method::Both) {
        intervals.push(one_step_ci(&sampler, &parts.center, mu_hat, n, cfg.alpha)?);
    }
    if matches!(cfg.method, Method::TwoStep | Method::Both) {
        intervals.push(two_step_ci(
            &sampler,
            &parts.center,
            mu_hat,
            n,
            cfg.alpha1,
            cfg.alpha2,
            cfg.grid,
        )?);
    }
    let report = CiReport {
        weights: cfg.weights.clone(),
        estimator: g.candidates[chosen].spec().label.clone(),
        mu_hat,
        n,
        draws: cfg.draws,
        seed: cfg.seed,
        bias_estimate: parts.center.iter().copied().collect(),
        intervals,
    };
    render(&report, cfg.format)
}

pub fn render(r: &CiReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(r)? + "\n"),
        Format::Csv => {
            let header = [
                "method",
                "weights",
                "estimator",
                "mu_hat",
                "lower",
                "upper",
                "alpha",
                "alpha1",
                "alpha2",
                "draws",
                "region_points",
                "seed",
            ];
            let rows: Vec<Vec<String>> = r
                .intervals
                .iter()
                .map(|ci| {
                    let (a, a1, a2) = match ci.alphas.as_slice() {
                        [a] => (Some(*a), None, None),
                        [a1, a2] => (None, Some(*a1), Some(*a2)),
                        _ => (None, None, None),
                    };
                    vec![
                        if ci.alphas.len() == 1 {
                            "1step"
                        } else {
                            "2step"
                        }
                        .to_string(),
                        r.weights.clone(),
                        r.estimator.clone(),
                        num(Some(r.mu_hat)),
                        num(Some(ci.lower)),
                        num(Some(ci.upper)),
                        num(a),
                        num(a1),
                        num(a2),
                        ci.draws.to_string(),
                        ci.region_points.map(|v| v.to_string()).unwrap_or_default(),
                        r.seed.to_string(),
                    ]
                })
                .collect();
            csv_text(&header, &rows)
        }
    }
}
