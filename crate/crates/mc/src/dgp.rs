use gfic_numerics::linalg::{min_eigenvalue, psd_sqrt};
use gfic_numerics::rng::StreamRng;
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::McError;

fn normal_vec(rng: &mut StreamRng, d: usize) -> DVector<f64> {
    DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>, McError> {
    let min = min_eigenvalue(cov);
    if min < -1e-12 {
        return Err(McError::NonPsdCovariance(min));
    }
    psd_sqrt(cov, 1e-12, "covariance").map_err(|_| McError::NonPsdCovariance(min))
}

/// `y_it = θ x_it + Σ_j γ_j y_{i,t-j} + η_i + v_it` with `(x_i, η_i, v_i)`
/// jointly normal: unit variances, `cov(x_it, η_i) = σ_xη` and
/// `cov(x_it, v_{i,t-1}) = σ_xv`, all else zero. Pre-sample `y` is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpanelDgp {
    pub theta: f64,
    pub gamma: Vec<f64>,
    pub sigma_x_eta: f64,
    pub sigma_xv: f64,
    pub t: usize,
    pub n: usize,
}

impl DpanelDgp {
    /// Joint covariance of `(x_1..x_T, η, v_1..v_T)`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let t = self.t;
        let mut c = DMatrix::identity(2 * t + 1, 2 * t + 1);
        for s in 0..t {
            c[(s, t)] = self.sigma_x_eta;
            c[(t, s)] = self.sigma_x_eta;
        }
        for s in 1..t {
            c[(s, t + s)] = self.sigma_xv;
            c[(t + s, s)] = self.sigma_xv;
        }
        c
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.t < 2 || self.n == 0 {
            return Err(McError::InvalidDesign(format!(
                "need T >= 2 and n >= 1, got T={} n={}",
                self.t, self.n
            )));
        }
        let sum: f64 = self.gamma.iter().sum();
        if sum.is_nan() || sum.abs() >= 1.0 {
            return Err(McError::NonStationary(sum));
        }
        factor(&self.covariance()).map(|_| ())
    }

    pub fn short_run(&self) -> f64 {
        self.theta
    }

    pub fn long_run(&self) -> f64 {
        self.theta / (1.0 - self.gamma.iter().sum::<f64>())
    }
}

/// A dynamic panel draw together with its latent components.
#[derive(Debug, Clone)]
pub struct DpanelDraw {
    pub panel: PanelDataset,
    pub eta: DVector<f64>,
    /// `n x T`.
    pub v: DMatrix<f64>,
}

pub fn draw_dpanel_full(dgp: &DpanelDgp, rng: &mut StreamRng) -> Result<DpanelDraw, McError> {
    dgp.validate()?;
    let (n, t) = (dgp.n, dgp.t);
    let l = factor(&dgp.covariance())?;
    let k = dgp.gamma.len();
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    let mut v = DMatrix::zeros(n, t);
    let mut eta = DVector::zeros(n);
    let mut hist = vec![0.0; k + t];
    for i in 0..n {
        let u = &l * normal_vec(rng, 2 * t + 1);
        eta[i] = u[t];
        hist.iter_mut().for_each(|h| *h = 0.0);
        for s in 0..t {
            let mut val = dgp.theta * u[s] + u[t] + u[t + 1 + s];
            for (j, g) in dgp.gamma.iter().enumerate() {
                val += g * hist[k + s - 1 - j];
            }
            hist[k + s] = val;
            y[(i, s)] = val;
            x[(i, s)] = u[s];
            v[(i, s)] = u[t + 1 + s];
        }
    }
    let panel =
        PanelDataset::from_matrices(y, x).map_err(|e| McError::InvalidDesign(e.to_string()))?;
    Ok(DpanelDraw { panel, eta, v })
}

pub fn draw_dpanel(dgp: &DpanelDgp, rng: &mut StreamRng) -> Result<PanelDataset, McError> {
    draw_dpanel_full(dgp, rng).map(|d| d.panel)
}

/// `y_it = β x_it + α_i + ε_it` with equicorrelated `x_i` (`ρ`),
/// `cov(x_it, α_i) = γ`, unit variances and `ε ~ N(0, σ_ε² I)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReFeDgp {
    pub beta: f64,
    pub rho: f64,
    pub gamma: f64,
    pub sigma2_eps: f64,
    pub t: usize,
    pub n: usize,
}

impl ReFeDgp {
    pub fn covariance(&self) -> DMatrix<f64> {
        let t = self.t;
        DMatrix::from_fn(t + 1, t + 1, |i, j| match (i == j, i == t || j == t) {
            (true, _) => 1.0,
            (false, true) => self.gamma,
            (false, false) => self.rho,
        })
    }

    pub fn validate(&self) -> Result<(), McError> {
        if self.t < 2 || self.n == 0 || self.sigma2_eps.is_nan() || self.sigma2_eps <= 0.0 {
            return Err(McError::InvalidDesign(format!(
                "need T >= 2, n >= 1 and σ_ε² > 0, got T={} n={} σ_ε²={}",
                self.t, self.n, self.sigma2_eps
            )));
        }
        factor(&self.covariance()).map(|_| ())
    }
}

pub fn draw_refe(dgp: &ReFeDgp, rng: &mut StreamRng) -> Result<PanelDataset, McError> {
    dgp.validate()?;
    let (n, t) = (dgp.n, dgp.t);
    let l = factor(&dgp.covariance())?;
    let se = dgp.sigma2_eps.sqrt();
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    for i in 0..n {
        let u = &l * normal_vec(rng, t + 1);
        for s in 0..t {
            x[(i, s)] = u[s];
            y[(i, s)] = dgp.beta * u[s] + u[t] + se * rng.sample::<f64, _>(StandardNormal);
        }
    }
    PanelDataset::from_matrices(y, x).map_err(|e| McError::InvalidDesign(e.to_string()))
}

/// `y_it = (β + η_i) x_it + ε_it` with iid standard-normal `x`,
/// `η_i ~ N(0, σ_η²)` and `ε ~ N(0, σ_ε²)`, all independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeHetDgp {
    pub beta: f64,
    pub sigma2_eta: f64,
    pub sigma2_eps: f64,
    pub t: usize,
    pub n: usize,
}

impl SlopeHetDgp {
    pub fn validate(&self) -> Result<(), McError> {
        if self.t < 2
            || self.n < 2
            || self.sigma2_eta.is_nan()
            || self.sigma2_eta < 0.0
            || self.sigma2_eps.is_nan()
            || self.sigma2_eps <= 0.0
        {
            return Err(McError::InvalidDesign(format!(
                "invalid slope-heterogeneity design {self:?}"
            )));
        }
        Ok(())
    }
}

pub fn draw_slopehet(dgp: &SlopeHetDgp, rng: &mut StreamRng) -> Result<PanelDataset, McError> {
    dgp.validate()?;
    let (n, t) = (dgp.n, dgp.t);
    let (sh, se) = (dgp.sigma2_eta.sqrt(), dgp.sigma2_eps.sqrt());
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    for i in 0..n {
        let b = dgp.beta + sh * rng.sample::<f64, _>(StandardNormal);
        for s in 0..t {
            let xv: f64 = rng.sample(StandardNormal);
            x[(i, s)] = xv;
            y[(i, s)] = b * xv + se * rng.sample::<f64, _>(StandardNormal);
        }
    }
    PanelDataset::from_matrices(y, x).map_err(|e| McError::InvalidDesign(e.to_string()))
}
