use std::sync::Arc;

use gfic_dpanel::{gfic_dpanel, standard_candidates, FitOptions, Target};
use gfic_engine::Criterion;
use gfic_inference::{
    one_step_ci, two_step_ci, DrawView, FixedWeights, FnRule, InferenceError, LambdaSampler,
    RegionGrid, SamplerCandidate, SelectRule,
};
use gfic_panel::PanelDataset;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

fn cand(label: &str, a: &[f64], ell: &[f64], avar: f64) -> SamplerCandidate {
    SamplerCandidate {
        label: label.into(),
        a: DVector::from_row_slice(a),
        ell: DVector::from_row_slice(ell),
        avar,
    }
}

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(x)
}

#[test]
fn single_candidate_gives_normal_quantiles() {
    let s = LambdaSampler::new(
        &DMatrix::identity(1, 1),
        &DMatrix::zeros(1, 1),
        vec![cand("only", &[1.0], &[0.0], 1.0)],
        Arc::new(FixedWeights(vec![1.0])),
        100_000,
        1,
    )
    .unwrap();
    let (a, b) = s.quantiles(&v(&[0.0]), 0.05).unwrap();
    assert!(
        (a + 1.96).abs() < 0.05 && (b - 1.96).abs() < 0.05,
        "{a} {b}"
    );
    let (a2, b2) = s
        .simulate_lambda_quantiles(&DVector::zeros(0), &v(&[0.0]), 0.05)
        .unwrap();
    assert_eq!((a, b), (a2, b2));
}

#[test]
fn zero_omega_is_degenerate() {
    let s = LambdaSampler::new(
        &DMatrix::zeros(2, 2),
        &DMatrix::from_row_slice(1, 2, &[1.0, 0.5]),
        vec![cand("c", &[1.0, -2.0], &[0.7], 0.0)],
        Arc::new(FixedWeights(vec![1.0])),
        2000,
        3,
    )
    .unwrap();
    let (a, b) = s.quantiles(&v(&[2.0]), 0.1).unwrap();
    assert_eq!(a, 0.7 * 2.0);
    assert_eq!(a, b);
    let ci = one_step_ci(&s, &v(&[0.0]), 1.5, 100, 0.1).unwrap();
    assert_eq!((ci.lower, ci.upper), (1.5, 1.5));
}

/// Two candidates, the first chosen when its simulated bias estimate is
/// small. Brute force with an independent generator and a full sort.
#[test]
fn threshold_rule_matches_brute_force() {
    let omega = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.1, 0.3, 2.0, -0.2, 0.1, -0.2, 0.5]);
    let psi = DMatrix::from_row_slice(1, 3, &[0.4, -0.6, 1.0]);
    let c0 = cand("restricted", &[0.5, 0.2, 0.0], &[1.0], 0.3);
    let c1 = cand("valid", &[1.0, 0.0, -0.3], &[0.0], 1.1);
    let rule = FnRule(Arc::new(|d: &DrawView<'_>, out: &mut [f64]| {
        let pick = usize::from(d.bias[0].abs() > 1.0);
        out.fill(0.0);
        out[pick] = 1.0;
    }));
    let s = LambdaSampler::new(
        &omega,
        &psi,
        vec![c0.clone(), c1.clone()],
        Arc::new(rule),
        200_000,
        11,
    )
    .unwrap();
    let d = v(&[0.8]);
    let (a, b) = s.quantiles(&d, 0.1).unwrap();

    let l = omega.clone().cholesky().unwrap().l();
    let mut rng = rand::rngs::StdRng::seed_from_u64(99);
    let m = 1_000_000;
    let mut lam: Vec<f64> = (0..m)
        .map(|_| {
            let z = DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal));
            let nn = &l * z;
            let xi = 0.8 + (&psi * &nn)[0];
            let c = if xi.abs() > 1.0 { &c1 } else { &c0 };
            c.a.dot(&nn) + c.ell[0] * 0.8
        })
        .collect();
    lam.sort_by(|x, y| x.total_cmp(y));
    let qa = lam[(0.05 * m as f64).ceil() as usize - 1];
    let qb = lam[(0.95 * m as f64).ceil() as usize - 1];
    assert!(
        (a - qa).abs() < 0.02 && (b - qb).abs() < 0.02,
        "({a}, {b}) vs ({qa}, {qb})"
    );
}

#[test]
fn select_rule_uses_simulated_gfic() {
    // candidate 0 has low variance but ℓ = 1; with d large it must lose
    let s = LambdaSampler::new(
        &DMatrix::identity(2, 2),
        &DMatrix::from_row_slice(1, 2, &[0.0, 0.1]),
        vec![
            cand("biased", &[0.5, 0.0], &[1.0], 0.25),
            cand("valid", &[1.0, 0.0], &[0.0], 1.0),
        ],
        Arc::new(SelectRule(Criterion::Gfic)),
        5000,
        2,
    )
    .unwrap();
    let lam = s.simulate(&v(&[10.0])).unwrap();
    // always the valid candidate: Λ = N_1, no shift
    assert!(lam.iter().all(|x| x.abs() < 6.0));
    let lam0 = s.simulate(&v(&[0.0])).unwrap();
    // always the biased one: Λ = N_1 / 2
    assert!(lam0.iter().all(|x| x.abs() < 3.0));
}

#[test]
fn bad_weights_are_reported() {
    let rule = FnRule(Arc::new(|_: &DrawView<'_>, out: &mut [f64]| out.fill(0.4)));
    let s = LambdaSampler::new(
        &DMatrix::identity(1, 1),
        &DMatrix::zeros(1, 1),
        vec![
            cand("a", &[1.0], &[0.0], 1.0),
            cand("b", &[1.0], &[0.0], 1.0),
        ],
        Arc::new(rule),
        1000,
        0,
    )
    .unwrap();
    assert!(matches!(
        s.quantiles(&v(&[0.0]), 0.05),
        Err(InferenceError::WeightsDoNotSumToOne { .. })
    ));
}

#[test]
fn construction_errors() {
    let one = || vec![cand("a", &[1.0], &[0.0], 1.0)];
    let fw = || Arc::new(FixedWeights(vec![1.0]));
    let neg = DMatrix::from_element(1, 1, -1.0);
    assert!(matches!(
        LambdaSampler::new(&neg, &DMatrix::zeros(1, 1), one(), fw(), 1000, 0),
        Err(InferenceError::NonPsdOmega(_))
    ));
    assert!(matches!(
        LambdaSampler::new(
            &DMatrix::identity(1, 1),
            &DMatrix::zeros(1, 1),
            one(),
            fw(),
            999,
            0
        ),
        Err(InferenceError::TooFewDraws { .. })
    ));
    assert!(matches!(
        LambdaSampler::new(
            &DMatrix::identity(2, 2),
            &DMatrix::zeros(1, 2),
            one(),
            fw(),
            1000,
            0
        ),
        Err(InferenceError::DimensionMismatch(_))
    ));
}

fn linear_sampler(seed: u64) -> LambdaSampler {
    LambdaSampler::new(
        &DMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 0.5]),
        &DMatrix::from_row_slice(1, 2, &[0.3, 1.0]),
        vec![
            cand("a", &[1.0, 0.5], &[0.4], 1.0),
            cand("b", &[0.2, -1.0], &[-0.1], 1.0),
        ],
        Arc::new(FixedWeights(vec![0.7, 0.3])),
        4000,
        seed,
    )
    .unwrap()
}

#[test]
fn two_step_contains_one_step() {
    let s = linear_sampler(5);
    let d = v(&[0.6]);
    let c1 = one_step_ci(&s, &d, 0.3, 400, 0.05).unwrap();
    let c2 = two_step_ci(&s, &d, 0.3, 400, 0.05, 0.05, RegionGrid::default()).unwrap();
    assert!(c2.lower <= c1.lower && c2.upper >= c1.upper);
    assert!(c2.width() > c1.width());
    // one-dimensional region: 2 directions x 5 shells + center
    assert_eq!(c2.region_points, Some(11));
}

#[test]
fn two_step_collapses_with_point_region() {
    let s = LambdaSampler::new(
        &DMatrix::identity(2, 2),
        &DMatrix::zeros(2, 2),
        vec![cand("a", &[1.0, 0.5], &[0.4, 0.1], 1.0)],
        Arc::new(FixedWeights(vec![1.0])),
        2000,
        8,
    )
    .unwrap();
    let d = v(&[0.6, -0.2]);
    let c1 = one_step_ci(&s, &d, 1.0, 100, 0.05).unwrap();
    let c2 = two_step_ci(&s, &d, 1.0, 100, 0.2, 0.05, RegionGrid::default()).unwrap();
    assert_eq!((c1.lower, c1.upper), (c2.lower, c2.upper));
}

#[test]
fn smaller_region_never_wider() {
    let s = linear_sampler(6);
    let d = v(&[0.1]);
    let mut prev = f64::INFINITY;
    for a1 in [0.01, 0.05, 0.1, 0.3, 0.6] {
        let w = two_step_ci(&s, &d, 0.0, 100, a1, 0.05, RegionGrid::default())
            .unwrap()
            .width();
        assert!(w <= prev + 1e-12, "alpha1 {a1}: {w} > {prev}");
        prev = w;
    }
}

#[test]
fn identical_seeds_identical_intervals() {
    let d = v(&[0.6]);
    let a = two_step_ci(
        &linear_sampler(9),
        &d,
        0.3,
        400,
        0.05,
        0.05,
        RegionGrid::default(),
    )
    .unwrap();
    let b = two_step_ci(
        &linear_sampler(9),
        &d,
        0.3,
        400,
        0.05,
        0.05,
        RegionGrid::default(),
    )
    .unwrap();
    assert_eq!(a.lower.to_bits(), b.lower.to_bits());
    assert_eq!(a.upper.to_bits(), b.upper.to_bits());
    let c = two_step_ci(
        &linear_sampler(10),
        &d,
        0.3,
        400,
        0.05,
        0.05,
        RegionGrid::default(),
    )
    .unwrap();
    assert_ne!(a.lower, c.lower);
}

#[test]
fn symmetric_quantiles_give_symmetric_interval() {
    let rule = FixedWeights(vec![1.0]);
    let s = LambdaSampler::new(
        &DMatrix::identity(1, 1),
        &DMatrix::zeros(1, 1),
        vec![cand("a", &[1.0], &[0.0], 1.0)],
        Arc::new(rule),
        10_000,
        4,
    )
    .unwrap();
    let (a, b) = s.quantiles(&v(&[0.0]), 0.05).unwrap();
    let ci = one_step_ci(&s, &v(&[0.0]), 2.0, 25, 0.05).unwrap();
    assert!((ci.upper - ci.lower - (b - a) / 5.0).abs() < 1e-12);
    assert!(((ci.upper + ci.lower) / 2.0 - (2.0 - (a + b) / 10.0)).abs() < 1e-12);
}

fn draw_dpanel(seed: u64, n: usize, t: usize) -> PanelDataset {
    // θ = 0.5, γ = (0.4, 0), σ_xη = 0.2, σ_xv = 0
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let d = 2 * t + 1;
    let mut cov = DMatrix::<f64>::identity(d, d);
    for s in 0..t {
        cov[(s, t)] = 0.2;
        cov[(t, s)] = 0.2;
    }
    let l = cov.cholesky().unwrap().l();
    let mut y = DMatrix::zeros(n, t);
    let mut x = DMatrix::zeros(n, t);
    for i in 0..n {
        let u = &l * DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut prev = 0.0;
        for s in 0..t {
            let val = 0.5 * u[s] + 0.4 * prev + u[t] + u[t + 1 + s];
            y[(i, s)] = val;
            x[(i, s)] = u[s];
            prev = val;
        }
    }
    PanelDataset::from_matrices(y, x).unwrap()
}

#[test]
fn valid_only_one_step_coverage() {
    let reps = 500;
    let alpha = 0.1;
    // TSLS carries an O(1/n) bias of about -17/n here; at n = 2000 it is
    // an eighth of a standard deviation
    let n = 2000;
    let cands = standard_candidates(2, 1);
    let covered = (0..reps)
        .filter(|&r| {
            let p = draw_dpanel(70_000 + r, n, 5);
            let g = gfic_dpanel(&p, &cands, Target::ShortRun, 2, FitOptions::default()).unwrap();
            let parts = g.sampler_parts();
            let labels = g.specs();
            let sc: Vec<SamplerCandidate> = labels
                .iter()
                .zip(&parts.loadings)
                .map(|(s, l)| SamplerCandidate::from_loadings(s.label.clone(), l))
                .collect();
            let lp = labels.iter().position(|s| s.label == "LP").unwrap();
            let s = LambdaSampler::new(
                &parts.omega,
                &parts.psi,
                sc,
                Arc::new(FixedWeights::indicator(labels.len(), lp)),
                2000,
                r,
            )
            .unwrap();
            one_step_ci(&s, &parts.center, g.candidates[lp].mu_hat, n, alpha)
                .unwrap()
                .contains(0.5)
        })
        .count();
    let cov = covered as f64 / reps as f64;
    let se = (alpha * (1.0 - alpha) / reps as f64).sqrt();
    assert!((cov - (1.0 - alpha)).abs() < 3.0 * se, "coverage {cov}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quantiles_ordered_and_nested(seed in 0u64..1000, d in -3.0f64..3.0, a1 in 0.01f64..0.3, a2 in 0.3f64..0.9) {
        let s = linear_sampler(seed);
        let d = v(&[d]);
        let (lo1, hi1) = s.quantiles(&d, a1).unwrap();
        let (lo2, hi2) = s.quantiles(&d, a2).unwrap();
        prop_assert!(lo1 <= hi1 && lo2 <= hi2);
        prop_assert!(lo1 <= lo2 && hi2 <= hi1);
    }
}
