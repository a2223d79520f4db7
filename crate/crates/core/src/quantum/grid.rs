use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Euclid;

use crate::error::{Error, Result};

/// Largest number of amplitudes (or density-matrix entries) a tensor state may
/// hold: `32^4` or `64^3` fit, `64^4` does not.
pub const MEMORY_GUARD: usize = 1 << 20;

const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// `M` equispaced points on the circle of length `length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    points: usize,
    length: f64,
}

impl Grid1D {
    pub fn new(points: usize, length: f64) -> Result<Self> {
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidInput(alloc::format!("grid size {points} must be a power of two, at least 8")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidInput("domain length must be positive".into()));
        }
        Ok(Grid1D { points, length })
    }

    /// `M` points on `[0, 2 pi)`.
    pub fn periodic(points: usize) -> Result<Self> {
        Self::new(points, 2.0 * PI)
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    /// Wavenumbers in FFT order: `0, 1, ..., M/2 - 1, -M/2, ..., -1` times `2 pi / length`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let m = self.points as i64;
        (0..m)
            .map(|j| {
                let mode = if j < m / 2 { j } else { j - m };
                2.0 * PI * mode as f64 / self.length
            })
            .collect()
    }

    /// Grid `L^p` norm `(h sum |f_j|^p)^{1/p}`.
    pub fn lp_norm(&self, values: impl Iterator<Item = f64>, p: f64) -> f64 {
        let sum: f64 = values.map(|v| v.abs().powf(p)).sum();
        (self.spacing() * sum).powf(1.0 / p)
    }
}

/// Even, real, bounded pair potentials, made periodic on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PotentialSpec {
    /// `a cos(2 pi x / length)`
    Cosine { amplitude: f64 },
    /// `-depth exp(-d^2 / (2 width^2))`, `d` the periodic distance to 0
    GaussianWell { depth: f64, width: f64 },
    /// `strength / sqrt(d^2 + eps^2)`
    SoftCoulomb { strength: f64, eps: f64 },
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialSpec::Cosine { amplitude: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PotentialSpec::Cosine { amplitude } if amplitude.is_finite() => Ok(()),
            PotentialSpec::GaussianWell { depth, width } if depth.is_finite() && width > 0.0 => Ok(()),
            PotentialSpec::SoftCoulomb { strength, eps } if strength.is_finite() && eps > 0.0 => Ok(()),
            _ => Err(Error::InvalidInput("potential parameters out of range".into())),
        }
    }

    /// `V(x)` for a displacement `x` on the circle.
    pub fn eval(&self, grid: &Grid1D, x: f64) -> f64 {
        let length = grid.length();
        let wrapped = Euclid::rem_euclid(&x, &length);
        let d = wrapped.min(length - wrapped);
        match *self {
            PotentialSpec::Cosine { amplitude } => amplitude * (2.0 * PI * d / length).cos(),
            PotentialSpec::GaussianWell { depth, width } => -depth * (-d * d / (2.0 * width * width)).exp(),
            PotentialSpec::SoftCoulomb { strength, eps } => strength / (d * d + eps * eps).sqrt(),
        }
    }

    /// `V(x_j)` for `j = 0..M`; `V(x_i - x_j)` is entry `(i - j) mod M`.
    pub fn sample(&self, grid: &Grid1D) -> Vec<f64> {
        (0..grid.len()).map(|j| self.eval(grid, grid.x(j))).collect()
    }

    /// `max_j |V(x_j) - V(x_{M-j})|`
    pub fn evenness_defect(&self, grid: &Grid1D) -> f64 {
        let v = self.sample(grid);
        let m = grid.len();
        (1..m).map(|j| (v[j] - v[m - j]).abs()).fold(0.0, f64::max)
    }

    /// Grid `L^p` norm of `V`.
    pub fn lp_norm(&self, grid: &Grid1D, p: f64) -> f64 {
        grid.lp_norm(self.sample(grid).into_iter(), p)
    }
}

fn norm_of(grid: &Grid1D, amplitudes: &[Complex64], cells: i32) -> f64 {
    (grid.spacing().powi(cells) * amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>()).sqrt()
}

/// A normalised single-particle state.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid1D,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    /// Wraps grid values, which must already be normalised.
    pub fn new(grid: Grid1D, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: amplitudes.len() });
        }
        let norm = norm_of(&grid, &amplitudes, 1);
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Normalization { norm });
        }
        Ok(WaveFunction { grid, amplitudes })
    }

    /// Samples `f` on the grid and normalises.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let mut amplitudes: Vec<Complex64> = (0..grid.len()).map(|j| f(grid.x(j))).collect();
        let norm = norm_of(&grid, &amplitudes, 1);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Normalization { norm });
        }
        for a in &mut amplitudes {
            *a /= norm;
        }
        Ok(WaveFunction { grid, amplitudes })
    }

    /// `e^{i k x} / sqrt(length)` with `k = 2 pi mode / length`.
    pub fn plane_wave(grid: Grid1D, mode: i64) -> Self {
        let k = 2.0 * PI * mode as f64 / grid.length();
        let c = 1.0 / grid.length().sqrt();
        let amplitudes = (0..grid.len()).map(|j| Complex64::from_polar(c, k * grid.x(j))).collect();
        WaveFunction { grid, amplitudes }
    }

    pub(crate) fn from_raw(grid: Grid1D, amplitudes: Vec<Complex64>) -> Self {
        WaveFunction { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.grid, &self.amplitudes, 1)
    }

    /// `h sum conj(self_j) other_j`
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let h = self.grid.spacing();
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum::<Complex64>() * h
    }

    /// Coordinates in the orthonormal basis, `sqrt(h) psi_j`.
    pub fn orthonormal(&self) -> Vec<Complex64> {
        let s = self.grid.spacing().sqrt();
        self.amplitudes.iter().map(|a| a * s).collect()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        self.grid.lp_norm(self.amplitudes.iter().map(|a| a.norm()), p)
    }
}

/// A normalised `N`-particle state, row-major with `x_1` slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorWaveFunction {
    grid: Grid1D,
    particles: usize,
    amplitudes: Vec<Complex64>,
}

pub(crate) fn check_guard(grid: &Grid1D, rank: usize) -> Result<usize> {
    let m = grid.len();
    let mut size: usize = 1;
    for _ in 0..rank {
        size = size
            .checked_mul(m)
            .filter(|s| *s <= MEMORY_GUARD)
            .ok_or(Error::MemoryGuard { amplitudes: (m as f64).powi(rank as i32) as usize, limit: MEMORY_GUARD })?;
    }
    Ok(size)
}

impl TensorWaveFunction {
    pub fn new(grid: Grid1D, particles: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if particles < 1 {
            return Err(Error::InvalidInput("need at least one particle".into()));
        }
        let size = check_guard(&grid, particles)?;
        if amplitudes.len() != size {
            return Err(Error::DimensionMismatch { expected: size, found: amplitudes.len() });
        }
        let norm = norm_of(&grid, &amplitudes, particles as i32);
        if (norm - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Normalization { norm });
        }
        Ok(TensorWaveFunction { grid, particles, amplitudes })
    }

    /// `psi_1 (x) ... (x) psi_N`
    pub fn product(factors: &[&WaveFunction]) -> Result<Self> {
        let first = factors.first().ok_or_else(|| Error::InvalidInput("no factors".into()))?;
        let grid = first.grid;
        if factors.iter().any(|f| f.grid != grid) {
            return Err(Error::InvalidInput("factors live on different grids".into()));
        }
        let size = check_guard(&grid, factors.len())?;
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        amplitudes.reserve(size);
        for f in factors {
            amplitudes = amplitudes.iter().flat_map(|a| f.amplitudes.iter().map(move |b| a * b)).collect();
        }
        Ok(TensorWaveFunction { grid, particles: factors.len(), amplitudes })
    }

    /// `psi^{(x) N}`
    pub fn power(psi: &WaveFunction, particles: usize) -> Result<Self> {
        Self::product(&vec![psi; particles])
    }

    pub(crate) fn from_raw(grid: Grid1D, particles: usize, amplitudes: Vec<Complex64>) -> Self {
        TensorWaveFunction { grid, particles, amplitudes }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_of(&self.grid, &self.amplitudes, self.particles as i32)
    }

    /// `h^N sum conj(self) other`
    pub fn inner(&self, other: &TensorWaveFunction) -> Complex64 {
        let w = self.grid.spacing().powi(self.particles as i32);
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum::<Complex64>() * w
    }

    /// `max |Psi(.., x_a, x_{a+1}, ..) - Psi(.., x_{a+1}, x_a, ..)|` over all
    /// adjacent transpositions; zero for a single particle.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.grid.len();
        let n = self.particles;
        let mut worst = 0.0f64;
        let mut digits = vec![0usize; n];
        for axis in 0..n.saturating_sub(1) {
            for (flat, a) in self.amplitudes.iter().enumerate() {
                let mut rest = flat;
                for d in digits.iter_mut().rev() {
                    *d = rest % m;
                    rest /= m;
                }
                digits.swap(axis, axis + 1);
                let swapped = digits.iter().fold(0usize, |acc, d| acc * m + d);
                worst = worst.max((a - self.amplitudes[swapped]).norm());
            }
        }
        worst
    }

    /// Largest absolute amplitude difference to another state.
    pub fn max_difference(&self, other: &TensorWaveFunction) -> f64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `sqrt(h^N sum |self - other|^2)`
    pub fn l2_distance(&self, other: &TensorWaveFunction) -> f64 {
        let w = self.grid.spacing().powi(self.particles as i32);
        let s: f64 = self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| (a - b).norm_sqr()).sum();
        (w * s).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        assert!(Grid1D::periodic(6).is_err());
        assert!(Grid1D::periodic(4).is_err());
        let g = Grid1D::periodic(8).unwrap();
        let k = g.wavenumbers();
        assert_eq!(k, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert!((g.spacing() - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn potentials_are_even() {
        let g = Grid1D::periodic(64).unwrap();
        for v in [
            PotentialSpec::Cosine { amplitude: 0.5 },
            PotentialSpec::GaussianWell { depth: 1.0, width: 0.5 },
            PotentialSpec::SoftCoulomb { strength: 1.0, eps: 0.3 },
        ] {
            v.validate().unwrap();
            assert!(v.evenness_defect(&g) <= 1e-12);
        }
        assert!(PotentialSpec::SoftCoulomb { strength: 1.0, eps: 0.0 }.validate().is_err());
    }

    #[test]
    fn plane_wave_is_normalised() {
        let g = Grid1D::periodic(16).unwrap();
        let p = WaveFunction::plane_wave(g, 3);
        assert!((p.norm() - 1.0).abs() < 1e-14);
        assert!(WaveFunction::plane_wave(g, 2).inner(&p).norm() < 1e-14);
        assert!(WaveFunction::new(g, vec![Complex64::new(1.0, 0.0); 16]).is_err());
    }

    #[test]
    fn tensor_power_norm_and_symmetry() {
        let g = Grid1D::periodic(8).unwrap();
        let psi = WaveFunction::from_fn(g, |x| Complex64::new(1.0 + 0.3 * x.cos(), 0.2 * (2.0 * x).sin())).unwrap();
        let t = TensorWaveFunction::power(&psi, 3).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-13);
        assert!(t.symmetry_defect() < 1e-15);
        let phi = WaveFunction::plane_wave(g, 1);
        let asym = TensorWaveFunction::product(&[&psi, &phi]).unwrap();
        assert!(asym.symmetry_defect() > 1e-3);
    }

    #[test]
    fn memory_guard() {
        let g = Grid1D::periodic(64).unwrap();
        let psi = WaveFunction::plane_wave(g, 0);
        assert!(TensorWaveFunction::power(&psi, 3).is_ok());
        assert!(matches!(TensorWaveFunction::power(&psi, 4), Err(Error::MemoryGuard { .. })));
    }
}
