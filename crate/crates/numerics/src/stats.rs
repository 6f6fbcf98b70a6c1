use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Nearest-rank empirical quantile: the smallest order statistic `x_(k)` with
/// `k = ceil(p * n)` (and `k >= 1`). Reorders `values` in place.
pub fn nearest_rank(values: &mut [f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "quantile of empty sample");
    let n = values.len();
    let k = ((p * n as f64).ceil() as usize).clamp(1, n);
    let (_, v, _) = values.select_nth_unstable_by(k - 1, |a, b| a.total_cmp(b));
    *v
}

/// Sample median (average of the two middle values for even sizes).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty sample");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with divisor `n - 1`.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Standard error of the mean.
pub fn mean_se(values: &[f64]) -> f64 {
    (variance(values) / values.len() as f64).sqrt()
}

/// Upper-tail probability `P(X > x)` for `X ~ chi^2_df`; `df = 0` gives 1.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(df as f64).expect("positive df");
    (1.0 - d.cdf(x.max(0.0))).clamp(0.0, 1.0)
}

/// The `p` quantile of `chi^2_df`.
pub fn chi2_quantile(p: f64, df: usize) -> f64 {
    if df == 0 {
        return 0.0;
    }
    let d = ChiSquared::new(df as f64).expect("positive df");
    d.inverse_cdf(p)
}
