use gfic_classic::{
    omega_inverse, refe_average, refe_fit, refe_select, slopehet_fit, slopehet_select,
    ClassicError, ReFeChoice, ReFeFit, SlopeHetChoice,
};
use gfic_numerics::stats::{mean, mean_se, variance};
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

/// `y = 0.5 x + α + ε` with equicorrelated `x` (ρ) and `cov(x_t, α) = γ`.
fn draw_refe(seed: u64, n: usize, t: usize, rho: f64, gamma: f64, s2e: f64) -> PanelDataset {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let cov = DMatrix::from_fn(t + 1, t + 1, |i, j| match (i == j, i == t || j == t) {
        (true, _) => 1.0,
        (false, true) => gamma,
        (false, false) => rho,
    });
    let l = cov.cholesky().unwrap().l();
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    for i in 0..n {
        let u = &l * DVector::from_fn(t + 1, |_, _| rng.sample::<f64, _>(StandardNormal));
        for s in 0..t {
            x[(i, s)] = u[s];
            y[(i, s)] = 0.5 * u[s] + u[t] + s2e.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
    }
    PanelDataset::from_matrices(y, x).unwrap()
}

/// `y_it = (β + η_i) x_it + ε_it` with iid standard-normal `x`.
fn draw_slopes(seed: u64, n: usize, t: usize, beta: f64, s2eta: f64, s2e: f64) -> PanelDataset {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    for i in 0..n {
        let b = beta + s2eta.sqrt() * rng.sample::<f64, _>(StandardNormal);
        for s in 0..t {
            let xv: f64 = rng.sample(StandardNormal);
            x[(i, s)] = xv;
            y[(i, s)] = b * xv + s2e.sqrt() * rng.sample::<f64, _>(StandardNormal);
        }
    }
    PanelDataset::from_matrices(y, x).unwrap()
}

#[test]
fn zero_alpha_variance_gives_pooled_ols() {
    let mut hits = 0;
    for seed in 0..40 {
        let p = draw_refe(seed, 50, 3, 0.3, 0.0, 1.0);
        let mut y = p.y().clone();
        // remove the individual effect entirely
        for i in 0..50 {
            let m = y.row(i).mean() - 0.5 * p.x().row(i).mean();
            for s in 0..3 {
                y[(i, s)] -= m;
            }
        }
        let f = refe_fit(&PanelDataset::from_matrices(y, p.x().clone()).unwrap()).unwrap();
        if f.sigma2_alpha == 0.0 {
            hits += 1;
            assert!(f.sigma2_alpha_raw <= 0.0);
            assert!((f.beta_re - f.beta_ols).abs() < 1e-10);
        }
    }
    assert!(hits > 0);
}

#[test]
fn orthogonal_errors_recover_beta_exactly() {
    // type A: x ∝ (1,-1), v ∝ (1,1); type B: x ∝ (1,1), v ∝ (1,-1)
    let beta = 0.7;
    let n = 20;
    let mut y = DMatrix::zeros(n, 2);
    let mut x = DMatrix::zeros(n, 2);
    for i in 0..n {
        let s = 1.0 + i as f64 * 0.1;
        let a = ((i * 7) % 5) as f64 - 2.0;
        if i % 2 == 0 {
            x[(i, 0)] = s;
            x[(i, 1)] = -s;
            y[(i, 0)] = beta * s + a;
            y[(i, 1)] = -beta * s + a;
        } else {
            x[(i, 0)] = s;
            x[(i, 1)] = s;
            y[(i, 0)] = beta * s + a;
            y[(i, 1)] = beta * s - a;
        }
    }
    let f = refe_fit(&PanelDataset::from_matrices(y, x).unwrap()).unwrap();
    assert!((f.beta_fe - beta).abs() < 1e-10);
    assert!((f.beta_ols - beta).abs() < 1e-10);
    assert!((f.beta_re - beta).abs() < 1e-10);
    assert!(f.tau_hat.abs() < 1e-10);
}

#[test]
fn fe_ignores_individual_constants() {
    let p = draw_refe(3, 80, 4, 0.3, 0.2, 2.5);
    let mut y = p.y().clone();
    for i in 0..80 {
        for s in 0..4 {
            y[(i, s)] += (i as f64).sin() * 10.0;
        }
    }
    let a = refe_fit(&p).unwrap();
    let b = refe_fit(&PanelDataset::from_matrices(y, p.x().clone()).unwrap()).unwrap();
    assert!((a.beta_fe - b.beta_fe).abs() < 1e-10);
}

#[test]
fn no_within_variation_is_an_error() {
    let x = DMatrix::from_fn(5, 3, |i, _| i as f64 + 1.0);
    let y = DMatrix::from_fn(5, 3, |i, s| (i + s) as f64);
    assert_eq!(
        refe_fit(&PanelDataset::from_matrices(y, x).unwrap()).unwrap_err(),
        ClassicError::NoWithinVariation
    );
}

#[test]
fn tau_hat_centered_and_variance_calibrated() {
    let reps = 2000;
    let fits: Vec<ReFeFit> = (0..reps)
        .map(|r| refe_fit(&draw_refe(1000 + r, 200, 2, 0.3, 0.0, 2.5)).unwrap())
        .collect();
    let taus: Vec<f64> = fits.iter().map(|f| f.tau_hat).collect();
    assert!(
        mean(&taus).abs() < 3.0 * mean_se(&taus),
        "mean {} se {}",
        mean(&taus),
        mean_se(&taus)
    );
    // population value: A = B/σ_ε² + E(ι'x)²/(T C), B = (T-1)(1-ρ)
    let (t, rho, s2e, s2a) = (2.0, 0.3, 2.5, 1.0);
    let b = (t - 1.0) * (1.0 - rho);
    let c = t * s2a + s2e;
    let a = b / s2e + (t + t * (t - 1.0) * rho) / (t * c);
    let sigma2 = c * c * a * (s2e * a / b - 1.0);
    let mc = variance(&taus);
    assert!((mc / sigma2 - 1.0).abs() < 0.1, "MC {mc} vs {sigma2}");
    let est = mean(&fits.iter().map(|f| f.sigma2_tau).collect::<Vec<_>>());
    assert!(
        (est / sigma2 - 1.0).abs() < 0.1,
        "plug-in {est} vs {sigma2}"
    );
}

fn synthetic(tau: f64, sigma2: f64) -> ReFeFit {
    ReFeFit {
        n: 100,
        t: 2,
        beta_re: 1.0,
        beta_fe: 2.0,
        beta_ols: 1.0,
        sigma2_alpha: 1.0,
        sigma2_alpha_raw: 1.0,
        sigma2_eps: 1.0,
        sigma2_v: 2.0,
        tau_hat: tau,
        sigma2_tau: sigma2,
        sigma2_tau_literal: sigma2,
        eta2_hat: 1.0,
        c_hat: 0.5,
    }
}

#[test]
fn selection_thresholds() {
    assert_eq!(refe_select(&synthetic(0.0, 4.0)).unwrap(), ReFeChoice::Re);
    assert_eq!(refe_select(&synthetic(4.0, 4.0)).unwrap(), ReFeChoice::Fe);
    assert_eq!(refe_select(&synthetic(-4.0, 4.0)).unwrap(), ReFeChoice::Fe);
    // |τ̂| = √2 σ̂ exactly (σ̂ = 1 so no rounding in the product)
    assert_eq!(
        refe_select(&synthetic(std::f64::consts::SQRT_2, 1.0)).unwrap(),
        ReFeChoice::Re
    );
    assert!(matches!(
        refe_select(&synthetic(1.0, 0.0)),
        Err(ClassicError::DegenerateSigma(_))
    ));
    assert!(refe_average(&synthetic(1.0, -1.0)).is_err());
}

#[test]
fn selection_matches_amse_comparison() {
    for tau in [0.0, 0.5, 1.3, 1.5, 2.0, 3.0] {
        let f = synthetic(tau, 1.0);
        let (re, fe) = f.amse();
        let by_amse = if re <= fe {
            ReFeChoice::Re
        } else {
            ReFeChoice::Fe
        };
        assert_eq!(refe_select(&f).unwrap(), by_amse);
    }
}

#[test]
fn averaging_weights() {
    let a = refe_average(&synthetic(0.5, 1.0)).unwrap();
    assert_eq!((a.omega_fe, a.omega_literal, a.mu), (0.0, 1.0, 1.0));
    let a = refe_average(&synthetic(2f64.sqrt(), 1.0)).unwrap();
    assert!((a.omega_literal - 0.5).abs() < 1e-12);
    let a = refe_average(&synthetic(3f64.sqrt(), 1.0)).unwrap();
    assert!((a.omega_literal - 1.0 / 3.0).abs() < 1e-12);
    assert!((a.omega_fe - 2.0 / 3.0).abs() < 1e-12);
    assert!((a.mu - (a.omega_fe * 2.0 + (1.0 - a.omega_fe) * 1.0)).abs() < 1e-12);
}

#[test]
fn re_usually_selected_without_correlation() {
    let reps = 500;
    let re = (0..reps)
        .filter(|&r| {
            refe_select(&refe_fit(&draw_refe(5000 + r, 250, 2, 0.3, 0.0, 2.5)).unwrap()).unwrap()
                == ReFeChoice::Re
        })
        .count();
    // |N(0,1)| ≤ √2 has probability 0.843
    let f = re as f64 / reps as f64;
    assert!((f - 0.843).abs() < 0.05, "RE frequency {f}");
}

#[test]
fn homogeneous_slopes_agree() {
    let t = 4;
    let x = DMatrix::from_fn(6, t, |_, s| [0.3, -1.2, 0.8, 2.0][s]);
    let y = &x * 1.7;
    let f = slopehet_fit(&PanelDataset::from_matrices(y, x).unwrap()).unwrap();
    assert!((f.beta_mg - f.beta_ols).abs() < 1e-10);
    assert!((f.beta_mg - 1.7).abs() < 1e-10);
}

#[test]
fn small_panel_by_hand() {
    let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -1.0, 1.0, 0.5, -2.0]);
    let y = DMatrix::from_row_slice(3, 2, &[2.0, 3.0, 0.0, 1.5, 1.0, -3.0]);
    let f = slopehet_fit(&PanelDataset::from_matrices(y.clone(), x.clone()).unwrap()).unwrap();
    // x'x = 5, 2, 4.25; x'y = 8, 1.5, 6.5
    let xx = [5.0, 2.0, 4.25];
    let xy = [8.0, 1.5, 6.5];
    let b: Vec<f64> = (0..3).map(|i| xy[i] / xx[i]).collect();
    let ols = 16.0 / 11.25;
    let mg = (b[0] + b[1] + b[2]) / 3.0;
    assert!((f.beta_ols - ols).abs() < 1e-12);
    assert!((f.beta_mg - mg).abs() < 1e-12);
    let kappa = 11.25 / 3.0;
    assert!((f.kappa_hat - kappa).abs() < 1e-12);
    assert!((f.zeta_hat - (0.2 + 0.5 + 1.0 / 4.25) / 3.0).abs() < 1e-12);
    let lam = xx.iter().map(|v| (v - kappa).powi(2)).sum::<f64>() / 2.0;
    assert!((f.lambda2_hat - lam).abs() < 1e-12);
    let (mut sse, mut pooled) = (0.0, 0.0);
    for i in 0..3 {
        for s in 0..2 {
            sse += (y[(i, s)] - x[(i, s)] * b[i]).powi(2);
            pooled += (y[(i, s)] - x[(i, s)] * ols).powi(2);
        }
    }
    let s2e = sse / 3.0;
    assert!((f.sigma2_eps_hat - s2e).abs() < 1e-12);
    assert!((f.sigma2_eps_pooled - pooled / 5.0).abs() < 1e-12);
    let sb = b.iter().map(|v| v * v).sum::<f64>() - 3.0 * mg * mg;
    assert!((f.s_b - sb).abs() < 1e-12);
    let eta = sb / 2.0 - (s2e / 5.0 + s2e / 2.0 + s2e / 4.25) / 3.0;
    assert!((f.sigma2_eta_raw - eta).abs() < 1e-12);
    assert_eq!(f.sigma2_eta_hat, eta.max(0.0));
    let tau = (0..3).map(|i| xy[i] - xx[i] * mg).sum::<f64>() / 3f64.sqrt();
    assert!((f.tau_hat - tau).abs() < 1e-12);
    let st = lam * f.sigma2_eta_hat + kappa * (kappa * f.zeta_hat - 1.0) * s2e;
    assert!((f.sigma2_tau_hat - st).abs() < 1e-12);
}

#[test]
fn zero_variation_names_individual() {
    let mut x = DMatrix::from_fn(3, 3, |i, s| (i + s) as f64 + 1.0);
    x.row_mut(1).fill(0.0);
    let y = DMatrix::from_element(3, 3, 1.0);
    assert_eq!(
        slopehet_fit(&PanelDataset::from_matrices(y, x).unwrap()).unwrap_err(),
        ClassicError::ZeroIndividualVariation { id: "2".into() }
    );
}

#[test]
fn eta_variance_centered_without_heterogeneity() {
    let v: Vec<f64> = (0..1000)
        .map(|r| {
            slopehet_fit(&draw_slopes(r, 500, 5, 1.0, 0.0, 1.0))
                .unwrap()
                .sigma2_eta_raw
        })
        .collect();
    assert!(
        mean(&v).abs() < 3.0 * mean_se(&v),
        "mean {} se {}",
        mean(&v),
        mean_se(&v)
    );
}

#[test]
fn normal_design_constants() {
    // x'x ~ chi2_5: κ = 5, λ² = 10, ζ = 1/3
    let f = slopehet_fit(&draw_slopes(9, 40_000, 5, 1.0, 0.2, 1.0)).unwrap();
    assert!((f.kappa_hat - 5.0).abs() < 0.05);
    assert!((f.lambda2_hat - 10.0).abs() < 0.3);
    assert!((f.zeta_hat - 1.0 / 3.0).abs() < 0.01);
}

#[test]
fn error_variance_ignores_slope_heterogeneity() {
    let f = slopehet_fit(&draw_slopes(3, 20_000, 5, 1.0, 0.5, 1.0)).unwrap();
    assert!(
        (f.sigma2_eps_hat - 1.0).abs() < 0.03,
        "{}",
        f.sigma2_eps_hat
    );
    // the pooled residuals also carry x_it η_i
    assert!(
        (f.sigma2_eps_pooled - 1.5).abs() < 0.05,
        "{}",
        f.sigma2_eps_pooled
    );
    assert!(
        (f.sigma2_eta_hat - 0.5).abs() < 0.05,
        "{}",
        f.sigma2_eta_hat
    );
}

#[test]
fn variance_branch_threshold_in_population() {
    // with κ = T, λ² = 2T, ζ = 1/(T-2): OLS more precise iff (T-2) σ_η² < σ_ε²
    let mut f = slopehet_fit(&draw_slopes(1, 10, 5, 1.0, 0.1, 1.0)).unwrap();
    f.kappa_hat = 5.0;
    f.lambda2_hat = 10.0;
    f.zeta_hat = 1.0 / 3.0;
    f.sigma2_eps_hat = 1.0;
    for (s2eta, mg) in [(0.1, false), (0.3, false), (0.34, true), (1.0, true)] {
        f.sigma2_eta_hat = s2eta;
        assert_eq!(f.mg_more_precise(), mg, "σ_η² = {s2eta}");
        if mg {
            assert_eq!(slopehet_select(&f), SlopeHetChoice::Mg);
        }
    }
    f.sigma2_eta_hat = 0.1;
    f.tau_hat = 0.0;
    assert_eq!(slopehet_select(&f), SlopeHetChoice::Ols);
}

proptest! {
    #[test]
    fn mean_group_is_average_of_slopes(seed in 0u64..1000, n in 2usize..30, t in 2usize..6) {
        let f = slopehet_fit(&draw_slopes(seed, n, t, 0.5, 0.3, 1.0)).unwrap();
        prop_assert!((f.beta_mg - f.slopes.iter().sum::<f64>() / n as f64).abs() < 1e-12);
        prop_assert!(f.sigma2_eta_hat >= 0.0 && f.kappa_hat > 0.0 && f.zeta_hat > 0.0);
    }

    #[test]
    fn omega_inverse_round_trip(t in 1usize..8, sa in 0.0f64..3.0, se in 0.1f64..3.0) {
        let om = DMatrix::from_fn(t, t, |i, j| sa + if i == j { se } else { 0.0 });
        prop_assert!((omega_inverse(t, sa, se) * om - DMatrix::identity(t, t)).amax() < 1e-10);
    }

    #[test]
    fn alpha_variance_never_negative(seed in 0u64..1000, gamma in 0.0f64..0.4) {
        let f = refe_fit(&draw_refe(seed, 30, 2, 0.3, gamma, 2.5)).unwrap();
        prop_assert!(f.sigma2_alpha >= 0.0 && f.sigma2_eps > 0.0 && f.sigma2_v >= 0.0);
    }

    #[test]
    fn fe_weight_monotone_in_tau(t1 in 0.0f64..5.0, t2 in 0.0f64..5.0, s2 in 0.1f64..3.0) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let a = refe_average(&synthetic(lo, s2)).unwrap();
        let b = refe_average(&synthetic(-hi, s2)).unwrap();
        prop_assert!(a.omega_fe <= b.omega_fe);
        prop_assert!(a.omega_literal > 0.0 && a.omega_literal <= 1.0);
    }
}
