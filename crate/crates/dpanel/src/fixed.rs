use gfic_engine::{
    bias_correct_b, compute_psi, estimate_bias_params, score_candidates, select, Criterion,
    GficScore, LimitObjects, SpecId,
};
use gfic_numerics::linalg::{solve, symmetrize};
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};

use crate::{
    robust_vcov, scores, stack_candidate, tsls_fit, DpanelError, DpanelSpec, Exog, FitOptions,
    Target,
};

/// Lag-`k` versus lag-`r` selection with the instrument set held fixed at
/// `z(k, P)` for both candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedInstrumentResult {
    /// `(θ̂, γ̂_1..γ̂_k)` of the unrestricted model.
    pub beta_full: DVector<f64>,
    /// `(θ̂, γ̂_1..γ̂_r)` of the restricted model on the same instruments.
    pub beta_restricted: DVector<f64>,
    pub mu_full: f64,
    pub mu_restricted: f64,
    /// Scores of `[full, restricted]`.
    pub scores: [GficScore; 2],
    /// 0 for the full model, 1 for the restricted one.
    pub selected: usize,
}

impl FixedInstrumentResult {
    pub fn mu_selected(&self) -> f64 {
        if self.selected == 0 {
            self.mu_full
        } else {
            self.mu_restricted
        }
    }
}

/// Score the restriction `γ_{r+1} = ... = γ_k = 0` with the generic GMM
/// machinery: moments `Z'(Δy - Wβ)/n` over `z(k, P)`, weight `(Z'Z/n)^{-1}`,
/// uncentered panel-robust `Ω̂`, no suspect moments.
pub fn fixed_instrument_gfic(
    p: &PanelDataset,
    k: usize,
    r: usize,
    target: Target,
    criterion: Criterion,
    opts: FitOptions,
) -> Result<FixedInstrumentResult, DpanelError> {
    if r >= k {
        return Err(DpanelError::InvalidCandidate(format!(
            "restricted lag {r} must be below {k}"
        )));
    }
    let data = stack_candidate(p, &DpanelSpec::new(k, Exog::Predetermined, "full"), opts)?;
    let n = data.n;
    let nf = n as f64;
    let full = tsls_fit(&data.z, &data.w, &data.dy, n)?;
    let w_r = data.w.columns(0, r + 1).into_owned();
    let restricted = tsls_fit(&data.z, &w_r, &data.dy, n)?;

    let f = -(data.z.transpose() * &data.w) / nf;
    let zz = symmetrize(&(data.z.transpose() * &data.z / nf));
    let wt = solve(&zz, &DMatrix::identity(zz.nrows(), zz.ncols()), "Z'Z")
        .map_err(|e| DpanelError::singular("Z'Z", e))?;
    let omega = robust_vcov(&scores(&data.z, &full.resid, data.n_blocks), false);
    let lo = LimitObjects::new(f, omega.clone(), symmetrize(&wt), data.z.ncols(), r + 1)?;

    let m = k - r;
    let all = vec![true; data.z.ncols()];
    let specs = [
        SpecId::new(r + 1, vec![true; m], all.clone(), format!("L{k}"))?,
        SpecId::new(r + 1, vec![false; m], all, format!("L{r}"))?,
    ];
    let est = estimate_bias_params(
        &full.beta.rows(r + 1, m).into_owned(),
        &DVector::zeros(m),
        &DVector::zeros(0),
        n,
    )?;
    let psi = compute_psi(&lo)?;
    let b_hat = bias_correct_b(&est, &psi, &omega)?;

    let mut at = full.beta.clone();
    at.rows_mut(r + 1, m).fill(0.0);
    let grad = target.gradient(&at)?;
    let sc = score_candidates(&lo, &specs, &b_hat, &grad)?;
    let selected = select(&specs, &sc, criterion)?;
    Ok(FixedInstrumentResult {
        mu_full: target.value(&full.beta)?,
        mu_restricted: target.value(&restricted.beta)?,
        beta_full: full.beta,
        beta_restricted: restricted.beta,
        scores: [sc[0], sc[1]],
        selected,
    })
}
