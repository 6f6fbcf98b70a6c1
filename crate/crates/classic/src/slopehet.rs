use gfic_panel::PanelDataset;
use serde::{Deserialize, Serialize};

use crate::ClassicError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeHetFit {
    pub n: usize,
    pub t: usize,
    pub beta_ols: f64,
    pub beta_mg: f64,
    /// Per-individual OLS slopes.
    pub slopes: Vec<f64>,
    /// `mean(x_i'x_i)`.
    pub kappa_hat: f64,
    /// `mean((x_i'x_i)⁻¹)`.
    pub zeta_hat: f64,
    /// Sample variance of `x_i'x_i` (divisor `n - 1`).
    pub lambda2_hat: f64,
    /// Residual variance around each individual's own slope (divisor
    /// `n(T - 1)`). Consistent for `σ_ε²` whether or not slopes differ.
    pub sigma2_eps_hat: f64,
    /// Residual variance around the pooled fit (divisor `nT - 1`). Its limit
    /// is `σ_ε² + σ_η² E[x²]`, so it is reported only.
    pub sigma2_eps_pooled: f64,
    /// Truncated at zero.
    pub sigma2_eta_hat: f64,
    /// `S_b/(n-1) - σ̂_ε² ζ̂` before truncation.
    pub sigma2_eta_raw: f64,
    /// `Σ β̂_i² - n β̂_MG²`.
    pub s_b: f64,
    /// `n^{-1/2} Σ x_i'(y_i - x_i β̂_MG)`.
    pub tau_hat: f64,
    /// `λ̂² σ̂_η² + κ̂(κ̂ζ̂ - 1) σ̂_ε²`.
    pub sigma2_tau_hat: f64,
}

impl SlopeHetFit {
    pub fn var_ols(&self) -> f64 {
        let k2 = self.kappa_hat.powi(2);
        (self.lambda2_hat + k2) / k2 * self.sigma2_eta_hat + self.sigma2_eps_hat / self.kappa_hat
    }

    pub fn var_mg(&self) -> f64 {
        self.sigma2_eta_hat + self.zeta_hat * self.sigma2_eps_hat
    }

    /// OLS AMSE with `τ̂² - σ̂_τ²` in place of `τ²`.
    pub fn amse_ols(&self) -> f64 {
        self.var_ols() + (self.tau_hat.powi(2) - self.sigma2_tau_hat) / self.kappa_hat.powi(2)
    }

    /// Whether the estimated MG variance is no larger than OLS's:
    /// `λ̂² σ̂_η² ≥ σ̂_ε² (κ̂² ζ̂ - κ̂)`.
    pub fn mg_more_precise(&self) -> bool {
        self.lambda2_hat * self.sigma2_eta_hat
            >= self.sigma2_eps_hat * (self.kappa_hat.powi(2) * self.zeta_hat - self.kappa_hat)
    }
}

pub fn slopehet_fit(p: &PanelDataset) -> Result<SlopeHetFit, ClassicError> {
    let (n, t) = (p.n(), p.periods());
    if t < 2 {
        return Err(ClassicError::TooFewPeriods { need: 2, got: t });
    }
    let (y, x) = (p.y(), p.x());
    let nf = n as f64;
    let mut xx = Vec::with_capacity(n);
    let mut slopes = Vec::with_capacity(n);
    for i in 0..n {
        let xi = x.row(i);
        let sxx = xi.dot(&xi);
        if sxx <= 0.0 {
            return Err(ClassicError::ZeroIndividualVariation {
                id: p.ids()[i].clone(),
            });
        }
        xx.push(sxx);
        slopes.push(xi.dot(&y.row(i)) / sxx);
    }
    let beta_ols = x.dot(y) / xx.iter().sum::<f64>();
    let beta_mg = slopes.iter().sum::<f64>() / nf;

    let kappa_hat = xx.iter().sum::<f64>() / nf;
    let zeta_hat = xx.iter().map(|v| 1.0 / v).sum::<f64>() / nf;
    let lambda2_hat = xx.iter().map(|v| (v - kappa_hat).powi(2)).sum::<f64>() / (nf - 1.0);
    let tf = t as f64;
    let sigma2_eps_pooled = (y - x * beta_ols).iter().map(|e| e * e).sum::<f64>() / (nf * tf - 1.0);
    let sigma2_eps_hat = (0..n)
        .map(|i| {
            (y.row(i) - x.row(i) * slopes[i])
                .iter()
                .map(|e| e * e)
                .sum::<f64>()
        })
        .sum::<f64>()
        / (nf * (tf - 1.0));
    let s_b = slopes.iter().map(|b| b * b).sum::<f64>() - nf * beta_mg * beta_mg;
    let sigma2_eta_raw = s_b / (nf - 1.0) - xx.iter().map(|v| sigma2_eps_hat / v).sum::<f64>() / nf;
    let sigma2_eta_hat = sigma2_eta_raw.max(0.0);

    let tau_hat = (0..n)
        .map(|i| x.row(i).dot(&(y.row(i) - x.row(i) * beta_mg)))
        .sum::<f64>()
        / nf.sqrt();
    let sigma2_tau_hat =
        lambda2_hat * sigma2_eta_hat + kappa_hat * (kappa_hat * zeta_hat - 1.0) * sigma2_eps_hat;
    Ok(SlopeHetFit {
        n,
        t,
        beta_ols,
        beta_mg,
        slopes,
        kappa_hat,
        zeta_hat,
        lambda2_hat,
        sigma2_eps_hat,
        sigma2_eps_pooled,
        sigma2_eta_hat,
        sigma2_eta_raw,
        s_b,
        tau_hat,
        sigma2_tau_hat,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeHetChoice {
    Ols,
    Mg,
}

/// MG outright when it is estimated to be at least as precise; otherwise
/// the smaller estimated AMSE, ties going to OLS.
pub fn slopehet_select(fit: &SlopeHetFit) -> SlopeHetChoice {
    if fit.mg_more_precise() || fit.amse_ols() > fit.var_mg() {
        SlopeHetChoice::Mg
    } else {
        SlopeHetChoice::Ols
    }
}
