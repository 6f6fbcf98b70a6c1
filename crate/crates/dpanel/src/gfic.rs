use gfic_engine::{select, Criterion, GficScore, Loadings, Selectable};
use gfic_numerics::linalg::quad_form;
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};

use crate::{
    dpanel_bias_correct, estimate_dpanel_bias, fit_candidate, robust_vcov, DpanelBias, DpanelError,
    DpanelFit, DpanelSpec, Exog, FitOptions, Target,
};

/// One scored candidate.
#[derive(Debug, Clone)]
pub struct CandidateResult {
    pub fit: DpanelFit,
    pub mu_hat: f64,
    pub score: GficScore,
    /// `√n(μ̂ - μ) → a'N_c + ℓ'[δ; τ]` with `N_c` the candidate's own
    /// moment noise.
    pub loadings: Loadings,
}

impl CandidateResult {
    pub fn spec(&self) -> &DpanelSpec {
        self.fit.spec()
    }
}

/// Joint limit objects for simulating the distribution of any weighted
/// combination of the scored candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplerParts {
    /// Covariance of the stacked moment noise.
    pub omega: DMatrix<f64>,
    /// Noise in `[δ̂; τ̂]` as a function of the stacked noise.
    pub psi: DMatrix<f64>,
    /// One entry per scored candidate, with `a` over the stacked noise.
    pub loadings: Vec<Loadings>,
    /// `[δ̂; τ̂]`.
    pub center: DVector<f64>,
}

/// Scores for a set of dynamic-panel candidates.
#[derive(Debug)]
pub struct DpanelGfic {
    pub target: Target,
    pub valid: DpanelFit,
    pub bias: DpanelBias,
    pub b_hat: DMatrix<f64>,
    /// Gradient over `(θ, γ_1..γ_k)` at `(θ̂, γ̂_1..γ̂_r, 0)`.
    pub grad: DVector<f64>,
    pub candidates: Vec<CandidateResult>,
    /// Candidates that could not be estimated, with the reason.
    pub failures: Vec<(DpanelSpec, DpanelError)>,
}

fn bias_loadings(spec: &DpanelSpec, n_blocks: usize, db: &DpanelBias) -> DMatrix<f64> {
    let (k, m) = (db.k, db.m());
    let bw = spec.block_width();
    let mut lb = DMatrix::zeros(n_blocks * bw, m + 1);
    for a in 0..n_blocks {
        let base = a * bw;
        if spec.lag < k {
            lb.view_mut((base, 0), (spec.lag + 1, m))
                .copy_from(&db.psi_p);
            if spec.exog.is_strict() {
                lb.view_mut((base + spec.lag + 1, 0), (1, m))
                    .copy_from(&db.psi_s);
            }
        }
        if spec.exog.is_strict() {
            lb[(base + bw - 1, m)] = 1.0;
        }
    }
    lb
}

/// Score every candidate against the valid lag-`k` predetermined fit.
///
/// Candidate lags must be `k` or a single common `r < k`. Candidates that
/// fail to estimate are reported in `failures`; a failure of the valid fit
/// is an error.
pub fn gfic_dpanel(
    p: &PanelDataset,
    candidates: &[DpanelSpec],
    target: Target,
    k: usize,
    opts: FitOptions,
) -> Result<DpanelGfic, DpanelError> {
    let r = candidates.iter().map(|c| c.lag).min().unwrap_or(k);
    for c in candidates {
        if (c.lag != k && c.lag != r) || c.instrument_lag != c.lag {
            return Err(DpanelError::InvalidCandidate(format!(
                "`{}` has lag {}; candidates must use lag {k} or a common smaller lag",
                c.label, c.lag
            )));
        }
    }
    let valid = fit_candidate(p, &DpanelSpec::new(k, Exog::Predetermined, "valid"), opts)?;
    let bias = estimate_dpanel_bias(p, &valid, r, opts)?;
    let b_hat = dpanel_bias_correct(&bias, &bias.v_ks)?;
    let m = k - r;

    let mut at = valid.beta.clone();
    at.rows_mut(r + 1, m).fill(0.0);
    let grad = target.gradient(&at)?;

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for spec in candidates {
        let fit = match fit_candidate(p, spec, opts) {
            Ok(f) => f,
            Err(e) => {
                failures.push((spec.clone(), e));
                continue;
            }
        };
        let mu_hat = match target.value(&fit.beta) {
            Ok(v) => v,
            Err(e) => {
                failures.push((spec.clone(), e));
                continue;
            }
        };
        let g_c = grad.rows(0, spec.lag + 1).into_owned();
        let a = fit.q.transpose() * &g_c;
        let avar = quad_form(&fit.v_hat(), &a);
        let lb = bias_loadings(spec, fit.data.n_blocks, &bias);
        let mut ell = lb.transpose() * &a;
        if spec.lag < k {
            for j in 0..m {
                ell[j] -= grad[r + 1 + j];
            }
        }
        let sq_bias = quad_form(&b_hat, &ell);
        results.push(CandidateResult {
            fit,
            mu_hat,
            score: GficScore::new(avar, sq_bias),
            loadings: Loadings { a, ell, avar },
        });
    }
    Ok(DpanelGfic {
        target,
        valid,
        bias,
        b_hat,
        grad,
        candidates: results,
        failures,
    })
}

struct Scored<'a>(&'a CandidateResult);

impl Selectable for Scored<'_> {
    fn label(&self) -> &str {
        &self.0.spec().label
    }
    fn n_params(&self) -> usize {
        self.0.spec().n_params()
    }
    fn n_moments(&self) -> usize {
        self.0.fit.data.z.ncols()
    }
}

impl DpanelGfic {
    /// Index into `candidates` of the minimizer of `criterion`.
    pub fn select(&self, criterion: Criterion) -> Result<usize, DpanelError> {
        let c: Vec<Scored> = self.candidates.iter().map(Scored).collect();
        Ok(select(&c, &self.scores(), criterion)?)
    }

    pub fn scores(&self) -> Vec<GficScore> {
        self.candidates.iter().map(|c| c.score).collect()
    }

    pub fn specs(&self) -> Vec<DpanelSpec> {
        self.candidates.iter().map(|c| c.spec().clone()).collect()
    }

    /// Stack the valid strict scores with every other candidate's own scores
    /// and express each candidate's noise loading on the stack.
    ///
    /// The valid candidate's moments are a reordering of the first part of
    /// the strict block, so its loading and the `[δ̂; τ̂]` noise both act
    /// through `Π`.
    pub fn sampler_parts(&self) -> SamplerParts {
        let db = &self.bias;
        let k = db.k;
        let n = db.n;
        let np = db.t_k * (k + 1);
        let base = db.ks_scores.ncols();
        let is_valid = |s: &DpanelSpec| s.lag == k && s.exog == Exog::Predetermined;

        let mut blocks = vec![db.ks_scores.clone()];
        let mut offsets = Vec::new();
        let mut width = base;
        for c in &self.candidates {
            if is_valid(c.spec()) {
                offsets.push(None);
            } else {
                offsets.push(Some(width));
                let s = c.fit.scores();
                width += s.ncols();
                blocks.push(s);
            }
        }
        let mut stacked = DMatrix::zeros(n, width);
        let mut col = 0;
        for b in &blocks {
            stacked.view_mut((0, col), (n, b.ncols())).copy_from(b);
            col += b.ncols();
        }
        let omega = robust_vcov(&stacked, true);

        let mut psi = DMatrix::zeros(db.m() + 1, width);
        psi.view_mut((0, 0), (db.m() + 1, base))
            .copy_from(&(&db.psi * &db.pi));

        let loadings = self
            .candidates
            .iter()
            .zip(&offsets)
            .map(|(c, off)| {
                let mut a = DVector::zeros(width);
                match off {
                    None => {
                        let mut reordered = DVector::zeros(base);
                        reordered.rows_mut(0, np).copy_from(&c.loadings.a);
                        a.rows_mut(0, base)
                            .copy_from(&(db.pi.transpose() * reordered));
                    }
                    Some(o) => a.rows_mut(*o, c.loadings.a.len()).copy_from(&c.loadings.a),
                }
                Loadings {
                    a,
                    ell: c.loadings.ell.clone(),
                    avar: c.loadings.avar,
                }
            })
            .collect();
        SamplerParts {
            omega,
            psi,
            loadings,
            center: db.stacked(),
        }
    }
}
