use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
use num_traits::Zero;

use super::evolution::{plan_steps, HartreePropagator, HartreeTrajectory, NbodyPropagator};
use super::grid::{check_guard, Grid1D, PotentialSpec, TensorWaveFunction, WaveFunction};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Hölder exponent used for bounded potentials (`||V||_{L^16}`, `||psi||_{L^{16/7}}`).
pub const DEFAULT_HOLDER_EXPONENT: f64 = 8.0;

const HERMITIAN_TOLERANCE: f64 = 1e-8;

/// A `k`-particle density matrix in the orthonormal grid basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    grid: Grid1D,
    order: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn from_matrix(grid: Grid1D, order: usize, matrix: CMatrix) -> Result<Self> {
        let size = check_guard(&grid, order)?;
        if matrix.dim() != size {
            return Err(Error::DimensionMismatch { expected: size, found: matrix.dim() });
        }
        Ok(DensityMatrix { grid, order, matrix })
    }

    /// `|psi><psi|`
    pub fn pure(psi: &WaveFunction) -> Self {
        let u = psi.orthonormal();
        DensityMatrix { grid: *psi.grid(), order: 1, matrix: CMatrix::outer(&u, &u) }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.matrix.hermitian_defect()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.matrix.hermitian_eigenvalues(HERMITIAN_TOLERANCE)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    /// Traces out the last particle.
    pub fn partial_trace(&self) -> Result<DensityMatrix> {
        if self.order < 2 {
            return Err(Error::InvalidInput("cannot trace out the only particle".into()));
        }
        let m = self.grid.len();
        let dim = self.matrix.dim() / m;
        let matrix = CMatrix::from_fn(dim, |i, j| (0..m).map(|z| self.matrix[(i * m + z, j * m + z)]).sum());
        Ok(DensityMatrix { grid: self.grid, order: self.order - 1, matrix })
    }
}

/// `D(X, Y) = h^N sum_Z Psi(X, Z) conj(Psi(Y, Z))`, allowing `k = N`.
fn marginal(psi: &TensorWaveFunction, order: usize) -> Result<DensityMatrix> {
    let grid = *psi.grid();
    let n = psi.particles();
    if order == 0 || order > n {
        return Err(Error::InvalidInput(alloc::format!("marginal order {order} outside 1..={n}")));
    }
    let rows = check_guard(&grid, order)?;
    let _entries = check_guard(&grid, 2 * order)?;
    let cols = psi.amplitudes().len() / rows;
    let w = grid.spacing().powi(n as i32);
    let a = psi.amplitudes();
    let mut matrix = CMatrix::zeros(rows);
    for i in 0..rows {
        let ri = &a[i * cols..(i + 1) * cols];
        for j in i..rows {
            let rj = &a[j * cols..(j + 1) * cols];
            let s: Complex64 = ri.iter().zip(rj).map(|(x, y)| x * y.conj()).sum::<Complex64>() * w;
            matrix[(i, j)] = s;
            matrix[(j, i)] = s.conj();
        }
        matrix[(i, i)].im = 0.0;
    }
    Ok(DensityMatrix { grid, order, matrix })
}

/// The `k`-particle reduced density matrix `D_{N:k}`, `1 <= k < N`.
pub fn reduced_density(psi: &TensorWaveFunction, order: usize) -> Result<DensityMatrix> {
    if order >= psi.particles() {
        return Err(Error::InvalidInput(alloc::format!(
            "marginal order {order} must be below the particle number {}",
            psi.particles()
        )));
    }
    marginal(psi, order)
}

/// `sum |lambda_i|` of a Hermitian matrix.
pub fn trace_norm(matrix: &CMatrix) -> Result<f64> {
    Ok(matrix.hermitian_eigenvalues(HERMITIAN_TOLERANCE)?.iter().map(|l| l.abs()).sum())
}

/// `1 - <psi | D | psi>`, clamped to `[0, 1]`.
pub fn pickl_functional(d1: &DensityMatrix, psi: &WaveFunction) -> Result<f64> {
    if d1.order != 1 || d1.grid != *psi.grid() {
        return Err(Error::DimensionMismatch { expected: psi.grid().len(), found: d1.matrix.dim() });
    }
    let u = psi.orthonormal();
    let e = 1.0 - d1.matrix.sandwich(&u, &u).re;
    Ok(e.max(-1e-10).min(1.0 + 1e-10).max(0.0).min(1.0))
}

/// `||psi||_{L^{2r'}}` with `1/r + 1/r' = 1`; `r = 1` gives the sup norm.
fn dual_norm(psi: &[Complex64], grid: &Grid1D, r: f64) -> f64 {
    if r == 1.0 {
        psi.iter().map(|p| p.norm()).fold(0.0, f64::max)
    } else {
        grid.lp_norm(psi.iter().map(|p| p.norm()), 2.0 * r / (r - 1.0))
    }
}

fn check_exponent(r: f64) -> Result<()> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(Error::InvalidInput("Hölder exponent must be a finite r >= 1".into()));
    }
    Ok(())
}

/// `(1/N)(exp(int_0^t 10 ||V||_{L^{2r}} ||psi(s)||_{L^{2r'}} ds) - 1)` at every
/// recorded time of a Hartree trajectory (trapezoid rule in time).
pub fn pickl_bound(
    particles: usize,
    potential: &PotentialSpec,
    r: f64,
    trajectory: &HartreeTrajectory,
) -> Result<Vec<f64>> {
    check_exponent(r)?;
    if particles == 0 {
        return Err(Error::InvalidInput("need at least one particle".into()));
    }
    let grid = *trajectory.states[0].grid();
    let v_norm = potential.lp_norm(&grid, 2.0 * r);
    let rates: Vec<f64> =
        trajectory.states.iter().map(|s| 10.0 * v_norm * dual_norm(s.amplitudes(), &grid, r)).collect();
    let mut integral = 0.0;
    let mut out = vec![0.0];
    for k in 1..rates.len() {
        integral += 0.5 * (trajectory.times[k] - trajectory.times[k - 1]) * (rates[k] + rates[k - 1]);
        out.push(((integral.abs()).exp() - 1.0) / particles as f64);
    }
    Ok(out)
}

/// Grid kinetic operator `-(1/2) d^2/dx^2` in the orthonormal basis.
pub fn kinetic_matrix(grid: &Grid1D) -> CMatrix {
    let m = grid.len();
    let k = grid.wavenumbers();
    let column: Vec<f64> = (0..m)
        .map(|d| {
            k.iter()
                .enumerate()
                .map(|(j, kj)| {
                    let mode = if j < m / 2 { j as f64 } else { j as f64 - m as f64 };
                    0.5 * kj * kj * (2.0 * PI * mode * d as f64 / m as f64).cos()
                })
                .sum::<f64>()
                / m as f64
        })
        .collect();
    CMatrix::from_fn(m, |i, j| Complex64::new(column[(i + m - j) % m], 0.0))
}

/// Frobenius norm of
/// `i (D1(t+dt) - D1(t-dt)) / (2dt) - [T, D1(t)] - ((N-1)/N) tr_2 [V_12, D2(t)]`
/// from three consecutive states of the `N`-body flow.
pub fn bbgky_residual(
    potential: &PotentialSpec,
    previous: &TensorWaveFunction,
    current: &TensorWaveFunction,
    next: &TensorWaveFunction,
    dt: f64,
) -> Result<f64> {
    let n = current.particles();
    if n < 2 {
        return Err(Error::InvalidInput("the hierarchy needs at least two particles".into()));
    }
    let grid = *current.grid();
    let m = grid.len();
    let before = marginal(previous, 1)?;
    let after = marginal(next, 1)?;
    let d1 = marginal(current, 1)?;
    let d2 = marginal(current, 2)?;
    let v = potential.sample(&grid);
    let t = kinetic_matrix(&grid);
    let i_dot = after.matrix.sub(&before.matrix).scale(Complex64::new(0.0, 1.0 / (2.0 * dt)));
    let free = t.commutator(&d1.matrix);
    let coupling = (n as f64 - 1.0) / n as f64;
    let interaction = CMatrix::from_fn(m, |x, y| {
        let mut s = Complex64::zero();
        for z in 0..m {
            let dv = v[(x + m - z) % m] - v[(y + m - z) % m];
            s += d2.matrix[(x * m + z, y * m + z)] * dv;
        }
        s * coupling
    });
    Ok(i_dot.sub(&free).sub(&interaction).frobenius())
}

/// One particle number's run of the mean-field comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSeries {
    pub particles: usize,
    pub times: Vec<f64>,
    pub pickl: Vec<f64>,
    pub bound: Vec<f64>,
    pub trace_distance: Vec<f64>,
    /// Recorded times where the trace distance fell below `E_N`.
    pub trace_distance_violations: usize,
    pub max_norm_defect: f64,
    pub max_hermitian_defect: f64,
    pub max_trace_defect: f64,
    pub min_eigenvalue: f64,
}

impl QuantumSeries {
    pub fn final_pickl(&self) -> f64 {
        *self.pickl.last().expect("series are never empty")
    }

    pub fn within_bound(&self) -> bool {
        self.pickl.iter().zip(&self.bound).all(|(e, b)| e <= b)
    }
}

/// Evolves `psi_in^{(x) N}` and `psi_in` side by side and records `E_N(t)`,
/// its envelope and `||D_{N:1} - |psi><psi| ||_1` every `record_every` steps.
pub fn hartree_limit_series(
    psi_in: &WaveFunction,
    potential: &PotentialSpec,
    particles: usize,
    t_final: f64,
    dt: f64,
    record_every: usize,
    r: f64,
) -> Result<QuantumSeries> {
    check_exponent(r)?;
    if particles < 2 {
        return Err(Error::InvalidInput("the comparison needs at least two particles".into()));
    }
    let grid = *psi_in.grid();
    let (steps, h) = plan_steps(t_final, dt, &grid)?;
    let every = record_every.max(1);
    let tensor = TensorWaveFunction::power(psi_in, particles)?;
    let mut many = NbodyPropagator::new(&tensor, potential, h)?;
    let mut mean_field = HartreePropagator::new(psi_in, potential, h)?;
    let v_norm = potential.lp_norm(&grid, 2.0 * r);
    let rate = |p: &HartreePropagator| 10.0 * v_norm * dual_norm(p.state().amplitudes(), &grid, r);

    let mut series = QuantumSeries {
        particles,
        times: vec![],
        pickl: vec![],
        bound: vec![],
        trace_distance: vec![],
        trace_distance_violations: 0,
        max_norm_defect: 0.0,
        max_hermitian_defect: 0.0,
        max_trace_defect: 0.0,
        min_eigenvalue: f64::INFINITY,
    };
    let record = |series: &mut QuantumSeries,
                  time: f64,
                  many: &NbodyPropagator,
                  psi: &WaveFunction,
                  integral: f64|
     -> Result<()> {
        let d1 = reduced_density(&many.state(), 1)?;
        let e = pickl_functional(&d1, psi)?;
        let distance = trace_norm(&d1.matrix.sub(&DensityMatrix::pure(psi).matrix))?;
        series.times.push(time);
        series.pickl.push(e);
        series.bound.push((integral.abs().exp() - 1.0) / particles as f64);
        series.trace_distance.push(distance);
        if distance < e {
            series.trace_distance_violations += 1;
        }
        series.max_hermitian_defect = series.max_hermitian_defect.max(d1.hermitian_defect());
        series.max_trace_defect = series.max_trace_defect.max((d1.trace() - 1.0).abs());
        series.min_eigenvalue = series.min_eigenvalue.min(d1.min_eigenvalue()?);
        Ok(())
    };

    let mut integral = 0.0;
    let mut previous_rate = rate(&mean_field);
    record(&mut series, 0.0, &many, &mean_field.state(), integral)?;
    for step in 1..=steps {
        many.step();
        mean_field.step();
        series.max_norm_defect = series.max_norm_defect.max((many.norm() - 1.0).abs());
        let current_rate = rate(&mean_field);
        integral += 0.5 * h * (previous_rate + current_rate);
        previous_rate = current_rate;
        if step % every == 0 || step == steps {
            record(&mut series, step as f64 * h, &many, &mean_field.state(), integral)?;
        }
    }
    Ok(series)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLimitReport {
    pub series: Vec<QuantumSeries>,
    /// `max_N N E_N(t_final) / min_N N E_N(t_final)`.
    pub scaling_ratio: f64,
    /// `E_N(t_final)` strictly decreases along the particle list.
    pub decreasing: bool,
}

impl QuantumLimitReport {
    pub fn from_series(series: Vec<QuantumSeries>) -> Self {
        let scaled: Vec<f64> = series.iter().map(|s| s.particles as f64 * s.final_pickl()).collect();
        let max = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = scaled.iter().copied().fold(f64::INFINITY, f64::min);
        let scaling_ratio = if max == 0.0 { 1.0 } else { max / min };
        let decreasing = series.windows(2).all(|w| w[1].final_pickl() < w[0].final_pickl());
        QuantumLimitReport { series, scaling_ratio, decreasing }
    }
}

pub fn hartree_limit_experiment(
    psi_in: &WaveFunction,
    potential: &PotentialSpec,
    particle_numbers: &[usize],
    t_final: f64,
    dt: f64,
    record_every: usize,
    r: f64,
) -> Result<QuantumLimitReport> {
    let series = particle_numbers
        .iter()
        .map(|&n| hartree_limit_series(psi_in, potential, n, t_final, dt, record_every, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuantumLimitReport::from_series(series))
}
