use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ClassicError;

/// `Ω⁻¹ = σ_ε⁻² [I - σ_α² / (T σ_α² + σ_ε²) ιι']` for `Ω = σ_ε² I + σ_α² ιι'`.
pub fn omega_inverse(t: usize, sigma2_alpha: f64, sigma2_eps: f64) -> DMatrix<f64> {
    let c = sigma2_alpha / (t as f64 * sigma2_alpha + sigma2_eps);
    DMatrix::from_fn(t, t, |i, j| ((i == j) as u8 as f64 - c) / sigma2_eps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReFeFit {
    pub n: usize,
    pub t: usize,
    pub beta_re: f64,
    pub beta_fe: f64,
    pub beta_ols: f64,
    /// Truncated at zero.
    pub sigma2_alpha: f64,
    /// `σ̂_v² - σ̂_ε²` before truncation.
    pub sigma2_alpha_raw: f64,
    pub sigma2_eps: f64,
    pub sigma2_v: f64,
    pub tau_hat: f64,
    /// Asymptotic variance of `τ̂`: `C² A (σ_ε² A / B - 1)` with
    /// `A = E[x'Ω⁻¹x]`, `B = E[x'Qx]`, `C = T σ_α² + σ_ε²`.
    pub sigma2_tau: f64,
    /// `C²/A (σ_ε²/(A B) - 1)`, the same quantities arranged as typeset in
    /// the original statement. Reported only.
    pub sigma2_tau_literal: f64,
    /// Variance of the RE limit, `1/A`.
    pub eta2_hat: f64,
    /// RE bias per unit of `τ`, `1/(C A)`.
    pub c_hat: f64,
}

impl ReFeFit {
    /// Estimated AMSE of the RE and FE estimators, plugging in the
    /// bias-corrected `τ̂² - σ̂²` for `τ²`.
    pub fn amse(&self) -> (f64, f64) {
        let c2 = self.c_hat * self.c_hat;
        (
            c2 * (self.tau_hat.powi(2) - self.sigma2_tau) + self.eta2_hat,
            c2 * self.sigma2_tau + self.eta2_hat,
        )
    }
}

pub fn refe_fit(p: &PanelDataset) -> Result<ReFeFit, ClassicError> {
    let (n, t) = (p.n(), p.periods());
    if t < 2 {
        return Err(ClassicError::TooFewPeriods { need: 2, got: t });
    }
    let (y, x) = (p.y(), p.x());
    let (nf, tf) = (n as f64, t as f64);

    let sxx = x.iter().map(|v| v * v).sum::<f64>();
    if sxx == 0.0 {
        return Err(ClassicError::NoVariation);
    }
    let beta_ols = x.dot(y) / sxx;

    let xbar = x.column_mean();
    let ybar = y.column_mean();
    let (mut qxx, mut qxy) = (0.0, 0.0);
    for i in 0..n {
        for s in 0..t {
            let xd = x[(i, s)] - xbar[i];
            qxx += xd * xd;
            qxy += xd * (y[(i, s)] - ybar[i]);
        }
    }
    if qxx <= 0.0 {
        return Err(ClassicError::NoWithinVariation);
    }
    let beta_fe = qxy / qxx;

    let mut ss_eps = 0.0;
    for i in 0..n {
        for s in 0..t {
            let e = (y[(i, s)] - ybar[i]) - (x[(i, s)] - xbar[i]) * beta_fe;
            ss_eps += e * e;
        }
    }
    let sigma2_eps = ss_eps / (nf * (tf - 1.0) - 1.0);
    let sigma2_v = (y - x * beta_ols).iter().map(|v| v * v).sum::<f64>() / (nf * tf - 1.0);
    let sigma2_alpha_raw = sigma2_v - sigma2_eps;
    let sigma2_alpha = sigma2_alpha_raw.max(0.0);

    let oi = omega_inverse(t, sigma2_alpha, sigma2_eps);
    let (mut a, mut axy, mut score) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let xi = DVector::from_iterator(t, x.row(i).iter().copied());
        let yi = DVector::from_iterator(t, y.row(i).iter().copied());
        let oxi = &oi * &xi;
        a += oxi.dot(&xi);
        axy += oxi.dot(&yi);
        score += oxi.dot(&(&yi - &xi * beta_fe));
    }
    let beta_re = axy / a;
    let (a, b) = (a / nf, qxx / nf);
    let c = tf * sigma2_alpha + sigma2_eps;
    Ok(ReFeFit {
        n,
        t,
        beta_re,
        beta_fe,
        beta_ols,
        sigma2_alpha,
        sigma2_alpha_raw,
        sigma2_eps,
        sigma2_v,
        tau_hat: c * score / nf.sqrt(),
        sigma2_tau: c * c * a * (sigma2_eps * a / b - 1.0),
        sigma2_tau_literal: c * c / a * (sigma2_eps / (a * b) - 1.0),
        eta2_hat: 1.0 / a,
        c_hat: 1.0 / (c * a),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReFeChoice {
    Re,
    Fe,
}

fn sigma(fit: &ReFeFit) -> Result<f64, ClassicError> {
    if fit.sigma2_tau.is_finite() && fit.sigma2_tau > 0.0 {
        Ok(fit.sigma2_tau.sqrt())
    } else {
        Err(ClassicError::DegenerateSigma(fit.sigma2_tau))
    }
}

/// RE when `|τ̂| ≤ √2 σ̂`, FE otherwise.
pub fn refe_select(fit: &ReFeFit) -> Result<ReFeChoice, ClassicError> {
    let s = sigma(fit)?;
    Ok(if fit.tau_hat.abs() <= std::f64::consts::SQRT_2 * s {
        ReFeChoice::Re
    } else {
        ReFeChoice::Fe
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReFeAverage {
    /// Weight on FE: `max(τ̂² - σ̂², 0) / (max(τ̂² - σ̂², 0) + σ̂²)`.
    pub omega_fe: f64,
    /// `[1 + max(τ̂² - σ̂², 0)/σ̂²]⁻¹`, which is the weight left on RE.
    pub omega_literal: f64,
    pub mu: f64,
}

pub fn refe_average(fit: &ReFeFit) -> Result<ReFeAverage, ClassicError> {
    let s2 = sigma(fit)?.powi(2);
    let excess = (fit.tau_hat.powi(2) - s2).max(0.0);
    let omega_fe = excess / (excess + s2);
    Ok(ReFeAverage {
        omega_fe,
        omega_literal: 1.0 / (1.0 + excess / s2),
        mu: omega_fe * fit.beta_fe + (1.0 - omega_fe) * fit.beta_re,
    })
}
