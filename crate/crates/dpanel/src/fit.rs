use gfic_numerics::linalg::{quad_form, solve, symmetrize};
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};

use crate::{stack_candidate, DpanelError, DpanelSpec, FitOptions, Stacked};

/// TSLS output on one stacked system.
#[derive(Debug, Clone, PartialEq)]
pub struct TslsFit {
    pub beta: DVector<f64>,
    /// `Q = n [W'Z(Z'Z)^{-1}Z'W]^{-1} W'Z(Z'Z)^{-1}`, so that
    /// `β̂ = Q Z'Δy / n`.
    pub q: DMatrix<f64>,
    pub resid: DVector<f64>,
}

/// Two-stage least squares of `dy` on `w` with instruments `z`, over `n`
/// individuals.
pub fn tsls_fit(
    z: &DMatrix<f64>,
    w: &DMatrix<f64>,
    dy: &DVector<f64>,
    n: usize,
) -> Result<TslsFit, DpanelError> {
    if z.nrows() != w.nrows() || z.nrows() != dy.len() {
        return Err(DpanelError::DimensionMismatch(format!(
            "Z has {} rows, W {}, dy {}",
            z.nrows(),
            w.nrows(),
            dy.len()
        )));
    }
    if z.ncols() < w.ncols() {
        return Err(DpanelError::SingularDesign {
            what: "TSLS design".into(),
            detail: format!("{} instruments for {} regressors", z.ncols(), w.ncols()),
        });
    }
    let zz = z.transpose() * z;
    let zw = z.transpose() * w;
    let zz_zw = solve(&zz, &zw, "Z'Z").map_err(|e| DpanelError::singular("Z'Z", e))?;
    let a = zw.transpose() * &zz_zw;
    let q = solve(&a, &zz_zw.transpose(), "W'P_Z W")
        .map_err(|e| DpanelError::singular("W'P_Z W", e))?
        * n as f64;
    let beta = &q * (z.transpose() * dy) / n as f64;
    let resid = dy - w * &beta;
    Ok(TslsFit { beta, q, resid })
}

/// Per-individual moment scores `Z_i'Δv_i`, one row per individual.
pub fn scores(z: &DMatrix<f64>, resid: &DVector<f64>, n_blocks: usize) -> DMatrix<f64> {
    let n = z.nrows() / n_blocks;
    let mut s = DMatrix::zeros(n, z.ncols());
    for i in 0..n {
        for a in 0..n_blocks {
            let row = i * n_blocks + a;
            let e = resid[row];
            if e != 0.0 {
                for j in 0..z.ncols() {
                    s[(i, j)] += e * z[(row, j)];
                }
            }
        }
    }
    s
}

/// Panel-robust covariance `n^{-1} Σ_i (s_i - m̄)(s_i - m̄)'` of the score rows,
/// with `m̄` the sample mean when `center` is set and zero otherwise.
pub fn robust_vcov(scores: &DMatrix<f64>, center: bool) -> DMatrix<f64> {
    let n = scores.nrows();
    if n == 0 {
        return DMatrix::zeros(scores.ncols(), scores.ncols());
    }
    let mut s = scores.clone();
    if center {
        let mean = s.row_mean();
        for mut r in s.row_iter_mut() {
            r -= &mean;
        }
    }
    symmetrize(&(s.transpose() * s / n as f64))
}

/// A fitted dynamic-panel candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct DpanelFit {
    pub data: Stacked,
    pub beta: DVector<f64>,
    pub q: DMatrix<f64>,
    pub resid: DVector<f64>,
}

impl DpanelFit {
    pub fn spec(&self) -> &DpanelSpec {
        &self.data.spec
    }

    pub fn n(&self) -> usize {
        self.data.n
    }

    pub fn theta(&self) -> f64 {
        self.beta[0]
    }

    /// Residuals as an `n x blocks` matrix.
    pub fn resid_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.data.n, self.data.n_blocks, self.resid.as_slice())
    }

    pub fn scores(&self) -> DMatrix<f64> {
        scores(&self.data.z, &self.resid, self.data.n_blocks)
    }

    /// Panel-robust covariance of the moments, centered for strict
    /// candidates only.
    pub fn v_hat(&self) -> DMatrix<f64> {
        robust_vcov(&self.scores(), self.spec().exog.is_strict())
    }

    /// `∇φ' Q V̂ Q' ∇φ` for a gradient over this candidate's parameters.
    pub fn avar(&self, grad: &DVector<f64>) -> f64 {
        quad_form(&self.v_hat(), &(self.q.transpose() * grad))
    }
}

pub fn fit_candidate(
    p: &PanelDataset,
    spec: &DpanelSpec,
    opts: FitOptions,
) -> Result<DpanelFit, DpanelError> {
    let data = stack_candidate(p, spec, opts)?;
    let t = tsls_fit(&data.z, &data.w, &data.dy, data.n).map_err(|e| match e {
        DpanelError::SingularDesign { what, detail } => DpanelError::SingularDesign {
            what: format!("{what} of `{}`", spec.label),
            detail,
        },
        other => other,
    })?;
    Ok(DpanelFit {
        data,
        beta: t.beta,
        q: t.q,
        resid: t.resid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residuals_give_zero_covariance() {
        let z = DMatrix::from_fn(6, 2, |i, j| (i + j) as f64);
        let s = scores(&z, &DVector::zeros(6), 2);
        assert_eq!(robust_vcov(&s, false), DMatrix::zeros(2, 2));
    }

    #[test]
    fn centering_removes_constant_scores() {
        let s = DMatrix::from_fn(5, 3, |_, j| j as f64 + 1.0);
        assert!(robust_vcov(&s, true).amax() < 1e-15);
        assert!(robust_vcov(&s, false).amax() > 1.0);
    }

    #[test]
    fn noiseless_recovery() {
        let z = DMatrix::from_fn(40, 3, |i, j| {
            ((i * 7 + j * 13) % 11) as f64 - 5.0 + (i as f64).sin()
        });
        let w = DMatrix::from_fn(40, 2, |i, j| z[(i, j)] + 0.3 * z[(i, 2)]);
        let b = DVector::from_vec(vec![0.5, -0.2]);
        let dy = &w * &b;
        let f = tsls_fit(&z, &w, &dy, 20).unwrap();
        assert!((f.beta - b).amax() < 1e-10);
    }
}
