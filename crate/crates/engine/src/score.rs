use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use gfic_numerics::linalg::{quad_form, solve};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{EngineError, LimitObjects, SpecId};

/// `K(b, c) = [F_bc' W_c F_bc]^{-1} F_bc' W_c`, of size `(|b| + s) x |c|`.
pub fn compute_k(lo: &LimitObjects, spec: &SpecId) -> Result<DMatrix<f64>, EngineError> {
    lo.check_spec(spec)?;
    if spec.n_moments() == 0 {
        return Err(EngineError::SingularDesign {
            label: spec.label.clone(),
            detail: "no moments selected".into(),
        });
    }
    let (xb, xc) = (spec.xi_b(), spec.xi_c());
    let fbc = &xc * &lo.f * xb.transpose();
    let wc = &xc * &lo.w * xc.transpose();
    let fw = fbc.transpose() * wc;
    solve(&(&fw * &fbc), &fw, &spec.label).map_err(|e| EngineError::singular(&spec.label, e))
}

/// `M(b, c) = Ξ_b' K Ξ_c [-G_γ 0; -H_γ I_q] + [0; I_r 0]`, the
/// `(s + r) x (r + q)` map from `[δ; τ]` to the asymptotic bias of `β̂(b, c)`.
pub fn compute_m(
    lo: &LimitObjects,
    spec: &SpecId,
    k: &DMatrix<f64>,
) -> Result<DMatrix<f64>, EngineError> {
    lo.check_spec(spec)?;
    let (p, q, s, r) = (lo.p, lo.q(), lo.s, lo.r());
    let (xb, xc) = (spec.xi_b(), spec.xi_c());
    if k.shape() != (xb.nrows(), xc.nrows()) {
        return Err(EngineError::DimensionMismatch(format!(
            "K is {}x{}, expected {}x{}",
            k.nrows(),
            k.ncols(),
            xb.nrows(),
            xc.nrows()
        )));
    }
    let mut shift = DMatrix::zeros(p + q, r + q);
    shift
        .view_mut((0, 0), (p + q, r))
        .copy_from(&(-lo.f.columns(s, r)));
    for j in 0..q {
        shift[(p + j, r + j)] = 1.0;
    }
    let mut m = xb.transpose() * k * xc * shift;
    for j in 0..r {
        m[(s + j, j)] += 1.0;
    }
    Ok(m)
}

/// Estimated asymptotic variance and squared bias of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GficScore {
    pub avar: f64,
    pub sq_bias: f64,
    pub gfic: f64,
    pub gfic_plus: f64,
}

impl GficScore {
    pub fn new(avar: f64, sq_bias: f64) -> Self {
        Self {
            avar,
            sq_bias,
            gfic: avar + sq_bias,
            gfic_plus: avar + sq_bias.max(0.0),
        }
    }

    pub fn get(&self, c: Criterion) -> f64 {
        match c {
            Criterion::Gfic => self.gfic,
            Criterion::GficPlus => self.gfic_plus,
        }
    }
}

/// Score a candidate given `B̂` and `∇φ` evaluated at the valid estimate.
pub fn gfic_score(
    lo: &LimitObjects,
    spec: &SpecId,
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    b_hat: &DMatrix<f64>,
    grad: &DVector<f64>,
) -> Result<GficScore, EngineError> {
    if grad.len() != lo.f.ncols() || b_hat.shape() != (m.ncols(), m.ncols()) {
        return Err(EngineError::DimensionMismatch(format!(
            "gradient has {} entries for {} parameters; B is {}x{} for {} bias parameters",
            grad.len(),
            lo.f.ncols(),
            b_hat.nrows(),
            b_hat.ncols(),
            m.ncols()
        )));
    }
    let xc = spec.xi_c();
    let a = xc.transpose() * k.transpose() * spec.xi_b() * grad;
    let avar = quad_form(&lo.omega, &a);
    let l = m.transpose() * grad;
    Ok(GficScore::new(avar, quad_form(b_hat, &l)))
}

/// Linear loadings of one candidate's limit distribution:
/// `√n(μ̂ - μ) → a'N + ℓ'[δ; τ]` with `N ~ N(0, Ω)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Loadings {
    pub a: DVector<f64>,
    pub ell: DVector<f64>,
    pub avar: f64,
}

pub fn lambda_loadings(
    lo: &LimitObjects,
    spec: &SpecId,
    k: &DMatrix<f64>,
    m: &DMatrix<f64>,
    grad: &DVector<f64>,
) -> Loadings {
    let a = -(spec.xi_c().transpose() * k.transpose() * spec.xi_b() * grad);
    let avar = quad_form(&lo.omega, &a);
    Loadings {
        a,
        ell: -(m.transpose() * grad),
        avar,
    }
}

/// Score every candidate. Fails on the first singular candidate.
pub fn score_candidates(
    lo: &LimitObjects,
    specs: &[SpecId],
    b_hat: &DMatrix<f64>,
    grad: &DVector<f64>,
) -> Result<Vec<GficScore>, EngineError> {
    specs
        .iter()
        .map(|s| {
            let k = compute_k(lo, s)?;
            let m = compute_m(lo, s, &k)?;
            gfic_score(lo, s, &k, &m, b_hat, grad)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    #[default]
    Gfic,
    GficPlus,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Gfic => "gfic",
            Criterion::GficPlus => "gfic-plus",
        })
    }
}

impl FromStr for Criterion {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gfic" => Ok(Criterion::Gfic),
            "gfic-plus" | "gfic+" => Ok(Criterion::GficPlus),
            other => Err(format!(
                "unknown criterion `{other}` (expected gfic or gfic-plus)"
            )),
        }
    }
}

/// What the tie-break needs to know about a candidate.
pub trait Selectable {
    fn label(&self) -> &str;
    fn n_params(&self) -> usize;
    fn n_moments(&self) -> usize;
}

impl Selectable for SpecId {
    fn label(&self) -> &str {
        &self.label
    }
    fn n_params(&self) -> usize {
        SpecId::n_params(self)
    }
    fn n_moments(&self) -> usize {
        SpecId::n_moments(self)
    }
}

/// Index of the candidate with the smallest criterion value. Exact ties go
/// to fewer estimated parameters, then more moments, then the
/// lexicographically smaller label. NaN scores never win.
pub fn select<T: Selectable>(
    candidates: &[T],
    scores: &[GficScore],
    criterion: Criterion,
) -> Result<usize, EngineError> {
    if candidates.is_empty() {
        return Err(EngineError::EmptyCandidateSet);
    }
    if candidates.len() != scores.len() {
        return Err(EngineError::DimensionMismatch(format!(
            "{} candidates, {} scores",
            candidates.len(),
            scores.len()
        )));
    }
    let key = |i: usize| {
        let v = scores[i].get(criterion);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let order = |&i: &usize, &j: &usize| -> Ordering {
        key(i)
            .total_cmp(&key(j))
            .then(candidates[i].n_params().cmp(&candidates[j].n_params()))
            .then(candidates[j].n_moments().cmp(&candidates[i].n_moments()))
            .then(candidates[i].label().cmp(candidates[j].label()))
    };
    Ok((0..candidates.len()).min_by(order).expect("non-empty"))
}
