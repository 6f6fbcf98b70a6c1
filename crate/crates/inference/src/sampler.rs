use std::sync::Arc;

use gfic_engine::Loadings;
use gfic_numerics::linalg::{psd_sqrt, quad_form, symmetrize};
use gfic_numerics::rng::substream;
use gfic_numerics::stats::nearest_rank;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::{DrawView, InferenceError, WeightRule};

/// Fewest draws accepted for tabulating quantiles.
pub const MIN_DRAWS: usize = 1000;

/// One candidate's limit: `a'N + ℓ'd` with estimated variance `avar`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerCandidate {
    pub label: String,
    pub a: DVector<f64>,
    pub ell: DVector<f64>,
    pub avar: f64,
}

impl SamplerCandidate {
    pub fn from_loadings(label: impl Into<String>, l: &Loadings) -> Self {
        SamplerCandidate {
            label: label.into(),
            a: l.a.clone(),
            ell: l.ell.clone(),
            avar: l.avar,
        }
    }
}

/// Simulates `Λ(d) = Σ_c ψ_c(N, d) (a_c'N + ℓ_c'd)`.
///
/// The draws `N_j` are fixed at construction (one counter-addressed RNG
/// stream per draw), so quantiles at different `d` share them. Only the
/// projections `a_c'N_j` and `ℓ_c'ΨN_j` are kept.
pub struct LambdaSampler {
    candidates: Vec<SamplerCandidate>,
    rule: Arc<dyn WeightRule>,
    draws: usize,
    seed: u64,
    psi: DMatrix<f64>,
    /// `ΨΩΨ'`.
    metric: DMatrix<f64>,
    /// `ℓ_c'ΨΩΨ'ℓ_c`.
    ell_var: Vec<f64>,
    /// `a_c'N_j`, row-major by draw.
    u: Vec<f64>,
    /// `ℓ_c'ΨN_j`, row-major by draw.
    w: Vec<f64>,
}

impl std::fmt::Debug for LambdaSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LambdaSampler")
            .field("candidates", &self.candidates.len())
            .field("draws", &self.draws)
            .field("seed", &self.seed)
            .finish()
    }
}

impl LambdaSampler {
    pub fn new(
        omega: &DMatrix<f64>,
        psi: &DMatrix<f64>,
        candidates: Vec<SamplerCandidate>,
        rule: Arc<dyn WeightRule>,
        draws: usize,
        seed: u64,
    ) -> Result<Self, InferenceError> {
        if candidates.is_empty() {
            return Err(InferenceError::Empty);
        }
        if draws < MIN_DRAWS {
            return Err(InferenceError::TooFewDraws {
                min: MIN_DRAWS,
                got: draws,
            });
        }
        let p = omega.nrows();
        if omega.ncols() != p || psi.ncols() != p {
            return Err(InferenceError::DimensionMismatch(format!(
                "Ω̂ is {}x{}, Ψ is {}x{}",
                omega.nrows(),
                omega.ncols(),
                psi.nrows(),
                psi.ncols()
            )));
        }
        let d = psi.nrows();
        for c in &candidates {
            if c.a.len() != p || c.ell.len() != d {
                return Err(InferenceError::DimensionMismatch(format!(
                    "candidate `{}` has loadings of length {}/{}, expected {p}/{d}",
                    c.label,
                    c.a.len(),
                    c.ell.len()
                )));
            }
        }
        let root =
            psd_sqrt(omega, 1e-8, "Ω̂").map_err(|e| InferenceError::NonPsdOmega(e.to_string()))?;
        let metric = symmetrize(&(psi * omega * psi.transpose()));
        let ell_var = candidates
            .iter()
            .map(|c| quad_form(&metric, &c.ell))
            .collect();

        // project the loadings onto the standard-normal coordinates once
        let nc = candidates.len();
        let psi_root = psi * &root;
        let mut a_std = DMatrix::zeros(nc, p);
        let mut w_std = DMatrix::zeros(nc, p);
        for (i, c) in candidates.iter().enumerate() {
            a_std.row_mut(i).copy_from(&(c.a.transpose() * &root));
            w_std.row_mut(i).copy_from(&(c.ell.transpose() * &psi_root));
        }
        let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..draws)
            .into_par_iter()
            .map(|j| {
                let mut rng = substream(seed, &[j as u64]);
                let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
                let u = &a_std * &z;
                let w = &w_std * &z;
                (u.as_slice().to_vec(), w.as_slice().to_vec())
            })
            .collect();
        let mut u = Vec::with_capacity(draws * nc);
        let mut w = Vec::with_capacity(draws * nc);
        for (ur, wr) in rows {
            u.extend(ur);
            w.extend(wr);
        }
        Ok(LambdaSampler {
            candidates,
            rule,
            draws,
            seed,
            psi: psi.clone(),
            metric,
            ell_var,
            u,
            w,
        })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn candidates(&self) -> &[SamplerCandidate] {
        &self.candidates
    }

    /// Dimension of `d = [δ; τ]`.
    pub fn bias_dim(&self) -> usize {
        self.psi.nrows()
    }

    /// `ΨΩΨ'`, the limit covariance of `[δ̂; τ̂]`.
    pub fn region_metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    /// All `Λ_j(d)`, in draw order.
    pub fn simulate(&self, d: &DVector<f64>) -> Result<Vec<f64>, InferenceError> {
        if d.len() != self.bias_dim() {
            return Err(InferenceError::DimensionMismatch(format!(
                "bias vector has length {}, expected {}",
                d.len(),
                self.bias_dim()
            )));
        }
        let nc = self.candidates.len();
        let shift: Vec<f64> = self.candidates.iter().map(|c| c.ell.dot(d)).collect();
        let avar: Vec<f64> = self.candidates.iter().map(|c| c.avar).collect();
        (0..self.draws)
            .into_par_iter()
            .map_init(
                || (vec![0.0; nc], vec![0.0; nc], vec![0.0; nc]),
                |(bias, sq, wt), j| {
                    let u = &self.u[j * nc..(j + 1) * nc];
                    let w = &self.w[j * nc..(j + 1) * nc];
                    for c in 0..nc {
                        bias[c] = shift[c] + w[c];
                        sq[c] = bias[c] * bias[c] - self.ell_var[c];
                    }
                    let view = DrawView {
                        avar: &avar,
                        sq_bias: sq,
                        bias,
                    };
                    self.rule.weights(&view, wt);
                    let sum: f64 = wt.iter().sum();
                    if (sum - 1.0).abs() > 1e-12 {
                        return Err(InferenceError::WeightsDoNotSumToOne { sum });
                    }
                    Ok((0..nc).map(|c| wt[c] * (u[c] + shift[c])).sum())
                },
            )
            .collect()
    }

    /// Equal-tailed nearest-rank quantiles `(â, b̂)` of `Λ(d)` at levels
    /// `α/2` and `1 - α/2`.
    pub fn quantiles(&self, d: &DVector<f64>, alpha: f64) -> Result<(f64, f64), InferenceError> {
        check_alpha(alpha)?;
        let mut v = self.simulate(d)?;
        let a = nearest_rank(&mut v, alpha / 2.0);
        let b = nearest_rank(&mut v, 1.0 - alpha / 2.0);
        Ok((a, b))
    }

    /// [`quantiles`](Self::quantiles) with `d` given as its two parts.
    pub fn simulate_lambda_quantiles(
        &self,
        delta: &DVector<f64>,
        tau: &DVector<f64>,
        alpha: f64,
    ) -> Result<(f64, f64), InferenceError> {
        let mut d = DVector::zeros(delta.len() + tau.len());
        d.rows_mut(0, delta.len()).copy_from(delta);
        d.rows_mut(delta.len(), tau.len()).copy_from(tau);
        self.quantiles(&d, alpha)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<(), InferenceError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(InferenceError::InvalidAlpha(alpha))
    }
}
