//! Small statistics helpers: log-log rate fits and ensemble summaries.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Least-squares fit of `ln(statistic) = intercept + slope ln(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Twice the standard error of the slope.
    pub slope_half_width: f64,
}

impl RateFit {
    pub fn fit(sizes: &[usize], values: &[f64]) -> Result<Self> {
        if sizes.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: sizes.len(), found: values.len() });
        }
        let k = sizes.len();
        if k < 3 {
            return Err(Error::InvalidInput("a rate fit needs at least three sample sizes".into()));
        }
        for i in 0..k {
            if sizes[i] == 0 || !(values[i] > 0.0) {
                return Err(Error::InvalidInput("rate fits need positive sizes and statistics".into()));
            }
            if sizes[..i].contains(&sizes[i]) {
                return Err(Error::InvalidInput("sample sizes must be distinct".into()));
            }
        }
        let xs: Vec<f64> = sizes.iter().map(|n| (*n as f64).ln()).collect();
        let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let (slope, intercept, se) = ols(&xs, &ys);
        Ok(RateFit { sizes: sizes.to_vec(), values: values.to_vec(), slope, intercept, slope_half_width: 2.0 * se })
    }
}

/// `(slope, intercept, standard error of slope)`
pub fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = if xs.len() > 2 { (rss / (k - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, intercept, se)
}

/// Mean and standard error of the mean, summed in index order.
pub fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Neumaier-compensated sum, accurate to a few ulps of the result whatever
/// the cancellation among terms.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}
