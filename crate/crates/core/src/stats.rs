//! Descriptive statistics and empirical CDFs for reports.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfPoint {
    pub value: f64,
    pub fraction: f64,
}

/// Empirical CDF of the finite entries of `values`, sorted ascending.
/// With more than `max_points` samples the table is thinned evenly; the
/// final sample (fraction 1) is always kept.
pub fn ecdf(values: &[f64], max_points: usize) -> Vec<EcdfPoint> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 || max_points == 0 {
        return Vec::new();
    }
    let point = |i: usize| EcdfPoint { value: v[i], fraction: (i + 1) as f64 / n as f64 };
    if n <= max_points {
        return (0..n).map(point).collect();
    }
    let mut idx: Vec<usize> = (1..=max_points).map(|k| (k * n).div_ceil(max_points) - 1).collect();
    idx.dedup();
    idx.into_iter().map(point).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return Summary { count: 0, mean: f64::NAN, median: f64::NAN, sd: f64::NAN, min: f64::NAN, max: f64::NAN };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    let sd = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    Summary { count: n, mean, median, sd, min: v[0], max: v[n - 1] }
}
