//! Weighted point clouds: N-body configurations and the empirical measures
//! they define.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Ordered list of `N` phase points in `R^d` with per-point weights.
///
/// Probability weights (the default) are nonnegative and sum to one. Vortex
/// intensities are arbitrary reals and are flagged as not normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    normalized: bool,
}

/// A configuration read as the atomic measure `sum_i w_i delta_{z_i}`.
pub type EmpiricalMeasure = Configuration;

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl Configuration {
    /// Uniform weights `1/N`. `points` is the flat row-major `N x d` array.
    pub fn uniform(dim: usize, points: Vec<f64>) -> Result<Self> {
        let n = check_shape(dim, &points)?;
        Ok(Configuration { dim, points, weights: vec![1.0 / n as f64; n], normalized: true })
    }

    pub fn weighted(dim: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = check_shape(dim, &points)?;
        if weights.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: weights.len() });
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::InvalidInput("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        Ok(Configuration { dim, points, weights, normalized: true })
    }

    /// Vortex-style intensities: any finite reals, not normalised.
    pub fn with_intensities(dim: usize, points: Vec<f64>, intensities: Vec<f64>) -> Result<Self> {
        let n = check_shape(dim, &points)?;
        if intensities.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: intensities.len() });
        }
        if intensities.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidInput("intensities must be finite".into()));
        }
        Ok(Configuration { dim, points, weights: intensities, normalized: false })
    }

    /// Same weights, new positions.
    pub fn with_points(&self, points: Vec<f64>) -> Result<Self> {
        if points.len() != self.points.len() {
            return Err(Error::DimensionMismatch { expected: self.points.len(), found: points.len() });
        }
        Ok(Configuration { points, ..self.clone() })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// `sum_i w_i z_i / sum_i w_i`
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        let mut total = 0.0;
        for (z, w) in self.iter() {
            total += w;
            for (m, x) in mean.iter_mut().zip(z) {
                *m += w * x;
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        mean
    }

    /// `<mu, phi>` with the configuration's weights.
    pub fn integrate(&self, phi: impl Fn(&[f64]) -> f64) -> f64 {
        self.iter().map(|(z, w)| w * phi(z)).sum()
    }
}

fn check_shape(dim: usize, points: &[f64]) -> Result<usize> {
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidInput("configuration has no points".into()));
    }
    if points.len() % dim != 0 {
        return Err(Error::InvalidInput(format!(
            "{} coordinates do not split into points of dimension {dim}",
            points.len()
        )));
    }
    Ok(points.len() / dim)
}

#[inline]
pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        assert!(Configuration::weighted(1, vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(Configuration::weighted(1, vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(Configuration::uniform(2, vec![0.0, 1.0, 2.0]).is_err());
        assert!(Configuration::uniform(2, vec![]).is_err());
    }

    #[test]
    fn symmetric_configuration_has_zero_mean() {
        let c = Configuration::uniform(2, vec![1.0, 2.0, -1.0, -2.0, 0.5, 0.0, -0.5, 0.0]).unwrap();
        assert!(c.mean().iter().all(|m| m.abs() < 1e-15));
    }
}
