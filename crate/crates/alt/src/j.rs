use gfic_dpanel::{
    robust_vcov, scores, stack_candidate, tsls_fit, DpanelError, DpanelSpec, FitOptions,
};
use gfic_numerics::linalg::{solve, solve_vec, symmetrize};
use gfic_numerics::stats::chi2_sf;
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};

use crate::AltError;

/// Hansen's J test of the overidentifying restrictions for one candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct JResult {
    pub spec: DpanelSpec,
    pub j_stat: f64,
    /// Moments minus estimated parameters.
    pub df: usize,
    pub p_value: f64,
    pub n_moments: usize,
    pub n_params: usize,
    /// Second-step estimate.
    pub beta: DVector<f64>,
}

/// Two-step efficient GMM on a stacked system. Returns `(β̂₂, J)`.
///
/// The first step is TSLS; the second-step weight is the inverse of the
/// centered panel-robust covariance of the first-step scores, and
/// `J = n ḡ(β̂₂)' V̂⁻¹ ḡ(β̂₂)`. Exactly identified systems give `J = 0`.
pub fn gmm_j(
    z: &DMatrix<f64>,
    w: &DMatrix<f64>,
    dy: &DVector<f64>,
    n_blocks: usize,
    label: &str,
) -> Result<(DVector<f64>, f64), AltError> {
    let n = z.nrows() / n_blocks;
    let first = tsls_fit(z, w, dy, n)?;
    if z.ncols() == w.ncols() {
        return Ok((first.beta, 0.0));
    }
    let sing = |e: gfic_numerics::LinalgError| AltError::SingularWeight {
        label: label.to_string(),
        detail: e.to_string(),
    };
    let v = robust_vcov(&scores(z, &first.resid, n_blocks), true);
    let nf = n as f64;
    let zw = z.transpose() * w / nf;
    let zy = z.transpose() * dy / nf;
    let vi_zw = solve(&v, &zw, "second-step weight").map_err(sing)?;
    let a = symmetrize(&(zw.transpose() * &vi_zw));
    let beta = solve_vec(
        &a,
        &(vi_zw.transpose() * &zy),
        "second-step normal equations",
    )
    .map_err(sing)?;
    let g = zy - &zw * &beta;
    let vi_g = solve_vec(&v, &g, "second-step weight").map_err(sing)?;
    Ok((beta, (nf * g.dot(&vi_g)).max(0.0)))
}

pub fn j_statistic(
    p: &PanelDataset,
    spec: &DpanelSpec,
    opts: FitOptions,
) -> Result<JResult, AltError> {
    let data = stack_candidate(p, spec, opts)?;
    let (n_moments, n_params) = (data.z.ncols(), data.w.ncols());
    if n_moments < n_params {
        return Err(DpanelError::InvalidCandidate(format!(
            "`{}` has {n_moments} moments for {n_params} parameters",
            spec.label
        ))
        .into());
    }
    let (beta, j) = gmm_j(&data.z, &data.w, &data.dy, data.n_blocks, &spec.label)?;
    let df = n_moments - n_params;
    let j_stat = if df == 0 { 0.0 } else { j };
    Ok(JResult {
        spec: spec.clone(),
        j_stat,
        df,
        p_value: chi2_sf(j_stat, df),
        n_moments,
        n_params,
        beta,
    })
}

/// Index of the first p-value at or above `alpha`, or the last index when
/// every earlier entry is rejected. `None` marks a candidate that could not
/// be tested and counts as rejected.
pub fn downward_select(p_values: &[Option<f64>], alpha: f64) -> Option<usize> {
    let last = p_values.len().checked_sub(1)?;
    Some(
        p_values[..last]
            .iter()
            .position(|p| p.is_some_and(|p| p >= alpha))
            .unwrap_or(last),
    )
}

/// Outcome of a downward J-test sequence.
#[derive(Debug, Clone)]
pub struct DownwardJ {
    pub selected: usize,
    /// One entry per candidate tested; the sequence stops at the first
    /// acceptance, so later entries are absent.
    pub tests: Vec<Result<JResult, String>>,
}

impl DownwardJ {
    pub fn selected_spec<'a>(&self, ordered: &'a [DpanelSpec]) -> &'a DpanelSpec {
        &ordered[self.selected]
    }
}

/// Test `ordered` from the most restrictive down and report the first that
/// is not rejected at `alpha`; the last candidate is the fallback and is
/// never tested itself. Candidates that fail to estimate count as rejected.
pub fn downward_j_test(
    p: &PanelDataset,
    ordered: &[DpanelSpec],
    alpha: f64,
    opts: FitOptions,
) -> Result<DownwardJ, AltError> {
    if ordered.is_empty() {
        return Err(AltError::EmptyCandidates);
    }
    let mut tests = Vec::new();
    for (i, spec) in ordered[..ordered.len() - 1].iter().enumerate() {
        let r = j_statistic(p, spec, opts).map_err(|e| e.to_string());
        let accepted = matches!(&r, Ok(j) if j.p_value >= alpha);
        tests.push(r);
        if accepted {
            return Ok(DownwardJ { selected: i, tests });
        }
    }
    Ok(DownwardJ {
        selected: ordered.len() - 1,
        tests,
    })
}
