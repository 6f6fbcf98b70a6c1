use gfic_numerics::linalg::{solve, symmetrize};
use nalgebra::{DMatrix, DVector};

use crate::{EngineError, LimitObjects};

/// Scaled bias parameters `δ̂ = √n (γ̂ - γ0)` and `τ̂ = √n h_n(β̂)`, both
/// taken from the valid estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasEstimate {
    pub delta: DVector<f64>,
    pub tau: DVector<f64>,
}

impl BiasEstimate {
    /// `[δ; τ]`.
    pub fn stacked(&self) -> DVector<f64> {
        let mut v = DVector::zeros(self.delta.len() + self.tau.len());
        v.rows_mut(0, self.delta.len()).copy_from(&self.delta);
        v.rows_mut(self.delta.len(), self.tau.len())
            .copy_from(&self.tau);
        v
    }
}

/// Build `(δ̂, τ̂)` from the valid estimates of `γ`, the suspect sample
/// moments at the valid estimate, and the sample size.
pub fn estimate_bias_params(
    gamma_valid: &DVector<f64>,
    gamma0: &DVector<f64>,
    h_n: &DVector<f64>,
    n: usize,
) -> Result<BiasEstimate, EngineError> {
    if gamma_valid.len() != gamma0.len() {
        return Err(EngineError::DimensionMismatch(format!(
            "gamma has {} entries, gamma0 has {}",
            gamma_valid.len(),
            gamma0.len()
        )));
    }
    let rn = (n as f64).sqrt();
    Ok(BiasEstimate {
        delta: (gamma_valid - gamma0) * rn,
        tau: h_n * rn,
    })
}

/// `Ψ = [-K_v^γ, 0; -H K_v, I_q]`, the `(r + q) x (p + q)` map from the
/// moment noise to the noise in `[δ̂; τ̂]`.
pub fn compute_psi(lo: &LimitObjects) -> Result<DMatrix<f64>, EngineError> {
    let (p, q, s, r) = (lo.p, lo.q(), lo.s, lo.r());
    let g = lo.g();
    let w_gg = lo.w.view((0, 0), (p, p)).into_owned();
    let gw = g.transpose() * &w_gg;
    let kv =
        solve(&(&gw * &g), &gw, "valid design").map_err(|e| EngineError::singular("valid", e))?;
    let mut psi = DMatrix::zeros(r + q, p + q);
    psi.view_mut((0, 0), (r, p)).copy_from(&(-kv.rows(s, r)));
    psi.view_mut((r, 0), (q, p)).copy_from(&(-(lo.h() * &kv)));
    for j in 0..q {
        psi[(r + j, p + j)] = 1.0;
    }
    Ok(psi)
}

/// `B̂ = [δ̂; τ̂][δ̂; τ̂]' - Ψ Ω Ψ'`, asymptotically unbiased for the outer
/// product of the true bias parameters. May be indefinite.
pub fn bias_correct_b(
    est: &BiasEstimate,
    psi: &DMatrix<f64>,
    omega: &DMatrix<f64>,
) -> Result<DMatrix<f64>, EngineError> {
    let d = est.stacked();
    if psi.nrows() != d.len() || psi.ncols() != omega.nrows() {
        return Err(EngineError::DimensionMismatch(format!(
            "Psi is {}x{}, bias vector has {} entries, Omega is {}x{}",
            psi.nrows(),
            psi.ncols(),
            d.len(),
            omega.nrows(),
            omega.ncols()
        )));
    }
    Ok(symmetrize(
        &(&d * d.transpose() - psi * omega * psi.transpose()),
    ))
}
