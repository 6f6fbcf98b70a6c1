use gfic_alt::{downward_j_test, gmm_j, j_statistic, mmsc, mmsc_select, JResult, MmscFlavor};
use gfic_dpanel::{standard_candidates, DpanelSpec, Exog, FitOptions};
use gfic_numerics::stats::chi2_sf;
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn draw(
    seed: u64,
    n: usize,
    t: usize,
    theta: f64,
    gamma: &[f64],
    sxe: f64,
    sxv: f64,
) -> PanelDataset {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let d = 2 * t + 1;
    let mut cov = DMatrix::<f64>::identity(d, d);
    for s in 0..t {
        cov[(s, t)] = sxe;
        cov[(t, s)] = sxe;
    }
    for s in 1..t {
        cov[(s, t + s)] = sxv;
        cov[(t + s, s)] = sxv;
    }
    let l = cov.cholesky().unwrap().l();
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    for i in 0..n {
        let u = &l * DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut hist = vec![0.0; gamma.len()];
        for s in 0..t {
            let mut v = theta * u[s] + u[t] + u[t + 1 + s];
            for (j, g) in gamma.iter().enumerate() {
                v += g * hist[hist.len() - 1 - j];
            }
            hist.push(v);
            y[(i, s)] = v;
            x[(i, s)] = u[s];
        }
    }
    PanelDataset::from_matrices(y, x).unwrap()
}

#[test]
fn exactly_identified_gives_zero() {
    // T = 3, lag 1: one block, two instruments, two parameters
    let p = draw(1, 200, 3, 0.5, &[0.4], 0.2, 0.0);
    let j = j_statistic(
        &p,
        &DpanelSpec::new(1, Exog::Predetermined, "L1P"),
        FitOptions::default(),
    )
    .unwrap();
    assert_eq!(j.df, 0);
    assert_eq!(j.j_stat, 0.0);
    assert_eq!(j.p_value, 1.0);
}

#[test]
fn moments_satisfied_in_sample() {
    // residuals orthogonal to every instrument column: J vanishes
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let (n, nb, m) = (60, 2, 6);
    let z = DMatrix::from_fn(n * nb, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let w = DMatrix::from_fn(n * nb, 2, |r, c| z[(r, c)] + 0.5 * z[(r, c + 2)]);
    let e = DMatrix::from_fn(n * nb, 1, |_, _| rng.sample::<f64, _>(StandardNormal));
    let e = gfic_numerics::linalg::ls_residuals(&z, &e, "z").unwrap();
    let beta = DVector::from_vec(vec![0.5, -0.3]);
    let dy = &w * &beta + e.column(0);
    let (b, j) = gmm_j(&z, &w, &dy, nb, "exact").unwrap();
    assert!(j < 1e-8, "J = {j}");
    assert!((b - beta).amax() < 1e-10);
}

#[test]
fn j_is_chi_square_under_correct_specification() {
    // lag 1, T = 4: two blocks of two instruments, df = 2
    let spec = DpanelSpec::new(1, Exog::Predetermined, "L1P");
    let reps = 2000;
    let mut cdf: Vec<f64> = (0..reps)
        .map(|r| {
            let p = draw(10_000 + r, 500, 4, 0.5, &[0.4], 0.2, 0.1);
            let j = j_statistic(&p, &spec, FitOptions::default()).unwrap();
            assert_eq!(j.df, 2);
            1.0 - chi2_sf(j.j_stat, 2)
        })
        .collect();
    cdf.sort_by(|a, b| a.total_cmp(b));
    let nf = reps as f64;
    let ks = cdf
        .iter()
        .enumerate()
        .map(|(i, &u)| {
            (u - i as f64 / nf)
                .abs()
                .max(((i + 1) as f64 / nf - u).abs())
        })
        .fold(0.0, f64::max);
    assert!(ks < 0.05, "KS distance {ks}");
}

#[test]
fn downward_j_prefers_restrictive_under_valid_restrictions() {
    // gamma_2 = 0 and x strictly exogenous: S should survive in most samples
    let cands = standard_candidates(2, 1);
    let ordered: Vec<DpanelSpec> = ["S", "P", "LS", "LP"]
        .iter()
        .map(|l| cands.iter().find(|c| &c.label == l).unwrap().clone())
        .collect();
    let mut picks = [0usize; 4];
    for r in 0..40 {
        let p = draw(500 + r, 500, 5, 0.5, &[0.4, 0.0], 0.2, 0.0);
        let d = downward_j_test(&p, &ordered, 0.05, FitOptions::default()).unwrap();
        picks[d.selected] += 1;
        assert_eq!(d.tests.len(), (d.selected + 1).min(3));
    }
    assert!(picks[0] >= 30, "{picks:?}");
}

#[test]
fn downward_j_zero_alpha_returns_first() {
    let p = draw(3, 100, 5, 0.5, &[0.4, 0.0], 0.2, 0.3);
    let ordered = standard_candidates(2, 1);
    let d = downward_j_test(&p, &ordered, 0.0, FitOptions::default()).unwrap();
    assert_eq!(d.selected, 0);
    assert!(downward_j_test(&p, &[], 0.05, FitOptions::default()).is_err());
}

fn jr(j_stat: f64, df: usize) -> JResult {
    JResult {
        spec: DpanelSpec::new(1, Exog::Predetermined, "x"),
        j_stat,
        df,
        p_value: chi2_sf(j_stat, df),
        n_moments: 2 + df,
        n_params: 2,
        beta: DVector::zeros(2),
    }
}

proptest! {
    #[test]
    fn mmsc_order_invariant_to_common_shift(
        js in proptest::collection::vec(0.0f64..50.0, 2..6),
        shift in -10.0f64..10.0,
        df in 1usize..6,
        n in 10usize..5000,
    ) {
        let base: Vec<JResult> = js.iter().map(|&j| jr(j, df)).collect();
        let shifted: Vec<JResult> = js.iter().map(|&j| jr(j + shift, df)).collect();
        for f in MmscFlavor::ALL {
            prop_assert_eq!(mmsc_select(&base, n, f).unwrap(), mmsc_select(&shifted, n, f).unwrap());
        }
    }

    #[test]
    fn bic_penalizes_more_than_aic(j in 0.0f64..50.0, df in 1usize..6, n in 8usize..100_000) {
        let r = jr(j, df);
        prop_assert!(mmsc(&r, n, MmscFlavor::Bic).unwrap() < mmsc(&r, n, MmscFlavor::Aic).unwrap());
    }
}
