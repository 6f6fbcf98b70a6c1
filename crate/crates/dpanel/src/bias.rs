use gfic_numerics::linalg::symmetrize;
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};

use crate::{
    robust_vcov, scores, stack_candidate, DpanelError, DpanelFit, DpanelSpec, Exog, FitOptions,
};

/// Bias parameter estimates for a lag-`k` versus lag-`r` comparison, all
/// built from the valid `(k, P)` fit.
#[derive(Debug, Clone, PartialEq)]
pub struct DpanelBias {
    pub k: usize,
    pub r: usize,
    pub n: usize,
    /// Number of valid-candidate periods, `T - k - 1`.
    pub t_k: usize,
    /// `√n (γ̂_{r+1}, ..., γ̂_k)` from the valid fit.
    pub delta: DVector<f64>,
    /// Average over periods of `n^{-1/2} Σ_i x_it Δv̂_it`.
    pub tau: f64,
    /// `(n T_k)^{-1} Σ_i Σ_t x_it [Δx_it, LΔy_it, ..., L^kΔy_it]`.
    pub xi: DVector<f64>,
    /// Maps the reordered strict scores `[P-scores; x-scores]` to the noise
    /// in `[δ̂; τ̂]`.
    pub psi: DMatrix<f64>,
    /// Reorders the stacked `(k, S)` scores into `[P-scores; x-scores]`.
    pub pi: DMatrix<f64>,
    /// `(r+1) x m`: limit of `(n T_k)^{-1} Σ z_it(r, P) [L^{r+1}Δy, ..., L^kΔy]`.
    pub psi_p: DMatrix<f64>,
    /// `1 x m`: the same with `x_it` in place of `z_it(r, P)`.
    pub psi_s: DMatrix<f64>,
    /// Centered covariance of the `(k, S)` scores at the valid residuals.
    pub v_ks: DMatrix<f64>,
    /// The `(k, S)` scores at the valid residuals, one row per individual.
    pub ks_scores: DMatrix<f64>,
}

impl DpanelBias {
    pub fn m(&self) -> usize {
        self.k - self.r
    }

    /// `[δ̂; τ̂]`.
    pub fn stacked(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.m() + 1);
        v.rows_mut(0, self.m()).copy_from(&self.delta);
        v[self.m()] = self.tau;
        v
    }
}

/// The permutation taking per-period strict blocks `[z(k,P)_t, x_t]` to
/// `[all z(k,P) blocks; all x_t]`.
pub fn strict_permutation(k: usize, t_k: usize) -> DMatrix<f64> {
    let bw = k + 2;
    let mut pi = DMatrix::zeros(t_k * bw, t_k * bw);
    for a in 0..t_k {
        for j in 0..=k {
            pi[(a * (k + 1) + j, a * bw + j)] = 1.0;
        }
        pi[(t_k * (k + 1) + a, a * bw + k + 1)] = 1.0;
    }
    pi
}

/// Estimate `δ`, `τ` and the pieces of their joint limit from the valid fit.
pub fn estimate_dpanel_bias(
    p: &PanelDataset,
    valid: &DpanelFit,
    r: usize,
    opts: FitOptions,
) -> Result<DpanelBias, DpanelError> {
    let vs = valid.spec();
    let k = vs.lag;
    if vs.exog != Exog::Predetermined || vs.instrument_lag != k {
        return Err(DpanelError::InvalidCandidate(format!(
            "`{}` is not a lag-{k} predetermined candidate",
            vs.label
        )));
    }
    if r > k {
        return Err(DpanelError::InvalidCandidate(format!(
            "restricted lag {r} exceeds valid lag {k}"
        )));
    }
    let (n, m) = (valid.n(), k - r);
    let t_k = valid.data.n_blocks;
    let rn = (n as f64).sqrt();

    let ks = stack_candidate(p, &DpanelSpec::new(k, Exog::Strict, "kS"), opts)?;
    let x_now = ks.x_total().expect("strict");
    let resid = &valid.resid;

    let delta = valid.beta.rows(r + 1, m) * rn;
    let tau = x_now.dot(resid) / (t_k as f64 * rn);
    let xi = valid.data.w.transpose() * &x_now / (n * t_k) as f64;

    let np = t_k * (k + 1);
    let mut psi = DMatrix::zeros(m + 1, np + t_k);
    psi.view_mut((0, 0), (m, np))
        .copy_from(&valid.q.rows(r + 1, m));
    psi.view_mut((m, 0), (1, np))
        .copy_from(&(-(xi.transpose() * &valid.q)));
    for a in 0..t_k {
        psi[(m, np + a)] = 1.0 / t_k as f64;
    }

    let ks_scores = scores(&ks.z, resid, ks.n_blocks);
    let v_ks = robust_vcov(&ks_scores, true);

    let mut psi_p = DMatrix::zeros(r + 1, m);
    let mut psi_s = DMatrix::zeros(1, m);
    if m > 0 {
        let rp = stack_candidate(p, &DpanelSpec::new(r, Exog::Predetermined, "rP"), opts)?;
        let rs = stack_candidate(p, &DpanelSpec::new(r, Exog::Strict, "rS"), opts)?;
        let rs_x = rs.x_current().expect("strict");
        let first = valid.data.first_period();
        for i in 0..n {
            for a in 0..t_k {
                let t = first + a;
                let row = i * t_k + a;
                let omitted = valid.data.w.row(row).columns(r + 1, m).into_owned();
                let rrow = rp.row(i, t);
                let ar = rrow % rp.n_blocks;
                let z = rp.z.row(rrow).columns(ar * (r + 1), r + 1).transpose();
                psi_p += z * &omitted;
                psi_s += omitted * rs_x[rs.row(i, t)];
            }
        }
        let scale = 1.0 / (n * t_k) as f64;
        psi_p *= scale;
        psi_s *= scale;
    }

    Ok(DpanelBias {
        k,
        r,
        n,
        t_k,
        delta,
        tau,
        xi,
        psi,
        pi: strict_permutation(k, t_k),
        psi_p,
        psi_s,
        v_ks,
        ks_scores,
    })
}

/// `[δ̂; τ̂][δ̂; τ̂]' - Ψ Π V̂(k,S) Π' Ψ'`: asymptotically unbiased for the
/// outer product of `[δ; τ]`.
pub fn dpanel_bias_correct(
    db: &DpanelBias,
    v_ks: &DMatrix<f64>,
) -> Result<DMatrix<f64>, DpanelError> {
    let d = db.stacked();
    if v_ks.shape() != db.pi.shape() || db.psi.ncols() != db.pi.nrows() {
        return Err(DpanelError::DimensionMismatch(format!(
            "V(k,S) is {}x{}, expected {}x{}",
            v_ks.nrows(),
            v_ks.ncols(),
            db.pi.nrows(),
            db.pi.ncols()
        )));
    }
    let pp = &db.psi * &db.pi;
    Ok(symmetrize(
        &(&d * d.transpose() - &pp * v_ks * pp.transpose()),
    ))
}
