//! Statistical helpers shared by integration tests.
#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Asymptotic Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov-Smirnov test of `values` against Uniform(0, 1),
/// with the Stephens small-sample correction. Returns `(D, p)`.
pub fn ks_uniform(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let d = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i as f64 + 1.0) / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max);
    let sn = n.sqrt();
    (d, kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d))
}

/// Pearson chi-square goodness of fit. Categories with expected count below
/// `min_expected` are pooled into one bin. Returns `(statistic, df, p)`.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], min_expected: f64) -> (f64, usize, f64) {
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut pooled = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        if e < min_expected {
            pooled.0 += o;
            pooled.1 += e;
        } else {
            bins.push((o, e));
        }
    }
    if pooled.1 > 0.0 {
        bins.push(pooled);
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = bins.len().saturating_sub(1).max(1);
    let p = ChiSquared::new(df as f64).unwrap().sf(stat);
    (stat, df, p)
}

/// Two-sided standard normal tail `P(|Z| > |z|)`.
pub fn normal_two_sided(z: f64) -> f64 {
    let n = statrs::distribution::Normal::standard();
    2.0 * n.sf(z.abs())
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    statrs::distribution::Normal::standard().inverse_cdf(p)
}
