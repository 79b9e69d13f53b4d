//! Kolmogorov–Smirnov distances between samples and reference d.f.s.

use crate::error::{domain, Result};

/// Asymptotic 1% critical value of the one-sample KS distance.
pub fn critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

/// One-sample KS distance `max_i max(|i/n − F(x_i)|, |(i−1)/n − F(x_i)|)`
/// for an ascending sample.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(domain("KS distance of an empty sample"));
    }
    debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]), "sample must be sorted");
    let n = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / n - f).abs().max((i as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(d)
}

/// Sorts a sample (NaN last) and returns its KS distance to `cdf`.
pub fn ks_distance_unsorted<F: Fn(f64) -> f64>(mut sample: Vec<f64>, cdf: F) -> Result<f64> {
    sample.sort_by(f64::total_cmp);
    ks_distance(&sample, cdf)
}

/// Fraction of an ascending sample that is `<= x`.
pub fn ecdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// `sup_{x ∈ grid} |F_n(x) − F(x)|` for an ascending sample.
pub fn grid_sup_distance<F: Fn(f64) -> f64>(sorted: &[f64], grid: &[f64], cdf: F) -> Result<f64> {
    if sorted.is_empty() {
        return Err(domain("empirical d.f. of an empty sample"));
    }
    Ok(grid
        .iter()
        .map(|&x| (ecdf(sorted, x) - cdf(x)).abs())
        .fold(0.0, f64::max))
}

/// Two-sample KS distance `sup_x |F_a(x) − F_b(x)|` for ascending samples.
pub fn two_sample_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(domain("KS distance of an empty sample"));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic 1% critical value of the two-sample KS distance.
pub fn two_sample_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}
