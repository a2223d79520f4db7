use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::grid::{check_guard, Grid1D, PotentialSpec, TensorWaveFunction, WaveFunction};
use crate::error::{Error, Result};
use crate::fft::Fft;

fn step_plan(t_final: f64, dt: f64, grid: &Grid1D) -> Result<(usize, f64)> {
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidInput("need dt > 0 and t_final >= 0".into()));
    }
    let h = grid.spacing();
    if dt > h * h {
        return Err(Error::InvalidInput(alloc::format!("time step {dt} exceeds h^2 = {}", h * h)));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    Ok((steps, if steps == 0 { dt } else { t_final / steps as f64 }))
}

fn recorded(step: usize, steps: usize, every: usize) -> bool {
    step % every == 0 || step == steps
}

/// Strang splitting for `i psi_t = -psi_xx / 2 + (V * |psi|^2) psi`.
#[derive(Debug, Clone)]
pub struct HartreePropagator {
    grid: Grid1D,
    fft: Fft,
    potential_hat: Vec<Complex64>,
    wavenumbers: Vec<f64>,
    kinetic_phase: Vec<Complex64>,
    dt: f64,
    psi: Vec<Complex64>,
    time: f64,
    scratch: Vec<Complex64>,
}

impl HartreePropagator {
    pub fn new(psi: &WaveFunction, potential: &PotentialSpec, dt: f64) -> Result<Self> {
        potential.validate()?;
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization { norm });
        }
        let grid = *psi.grid();
        let fft = Fft::new(grid.len());
        let mut potential_hat: Vec<Complex64> =
            potential.sample(&grid).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        fft.forward(&mut potential_hat);
        let wavenumbers = grid.wavenumbers();
        let kinetic_phase = wavenumbers.iter().map(|k| Complex64::from_polar(1.0, -0.5 * dt * k * k)).collect();
        Ok(HartreePropagator {
            grid,
            fft,
            potential_hat,
            wavenumbers,
            kinetic_phase,
            dt,
            psi: psi.amplitudes().to_vec(),
            time: 0.0,
            scratch: vec![Complex64::new(0.0, 0.0); grid.len()],
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> WaveFunction {
        WaveFunction::from_raw(self.grid, self.psi.clone())
    }

    /// `W = V * |psi|^2` on the grid (`h sum_j V(x_i - x_j) |psi_j|^2`).
    pub fn mean_field(&mut self) -> Vec<f64> {
        let h = self.grid.spacing();
        for (s, p) in self.scratch.iter_mut().zip(&self.psi) {
            *s = Complex64::new(p.norm_sqr(), 0.0);
        }
        self.fft.forward(&mut self.scratch);
        for (s, v) in self.scratch.iter_mut().zip(&self.potential_hat) {
            *s *= v;
        }
        self.fft.inverse(&mut self.scratch);
        self.scratch.iter().map(|s| h * s.re).collect()
    }

    fn potential_half_step(&mut self) {
        let w = self.mean_field();
        let half = 0.5 * self.dt;
        for (p, w) in self.psi.iter_mut().zip(w) {
            *p *= Complex64::from_polar(1.0, -half * w);
        }
    }

    pub fn step(&mut self) {
        self.potential_half_step();
        self.fft.forward(&mut self.psi);
        for (p, phase) in self.psi.iter_mut().zip(&self.kinetic_phase) {
            *p *= phase;
        }
        self.fft.inverse(&mut self.psi);
        self.potential_half_step();
        self.time += self.dt;
    }

    pub fn mass(&self) -> f64 {
        self.grid.spacing() * self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>()
    }

    /// `||psi_x||^2 / 2 + (1/2) h sum W |psi|^2`
    pub fn energy(&mut self) -> f64 {
        let h = self.grid.spacing();
        let m = self.grid.len() as f64;
        let mut hat = self.psi.clone();
        self.fft.forward(&mut hat);
        let kinetic: f64 =
            0.5 * h / m * hat.iter().zip(&self.wavenumbers).map(|(c, k)| k * k * c.norm_sqr()).sum::<f64>();
        let w = self.mean_field();
        let interaction: f64 = 0.5 * h * w.iter().zip(&self.psi).map(|(w, p)| w * p.norm_sqr()).sum::<f64>();
        kinetic + interaction
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HartreeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<WaveFunction>,
    pub masses: Vec<f64>,
    pub energies: Vec<f64>,
    pub dt: f64,
}

impl HartreeTrajectory {
    pub fn final_state(&self) -> &WaveFunction {
        self.states.last().expect("trajectories are never empty")
    }

    /// `max_t |E(t) - E(0)| / |E(0)|` (absolute when `E(0) = 0`).
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energies[0];
        let scale = if e0 == 0.0 { 1.0 } else { e0.abs() };
        self.energies.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn mass_defect(&self) -> f64 {
        self.masses.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Evolves to `t_final` in `ceil(t_final / dt)` equal steps, recording every
/// `record_every` steps and at the end. Requires `dt <= h^2`.
pub fn solve_hartree(
    psi_in: &WaveFunction,
    potential: &PotentialSpec,
    t_final: f64,
    dt: f64,
    record_every: usize,
) -> Result<HartreeTrajectory> {
    let (steps, h) = step_plan(t_final, dt, psi_in.grid())?;
    let every = record_every.max(1);
    let mut prop = HartreePropagator::new(psi_in, potential, h)?;
    let mut traj = HartreeTrajectory { times: vec![], states: vec![], masses: vec![], energies: vec![], dt: h };
    let mut record = |prop: &mut HartreePropagator, time: f64| {
        traj.times.push(time);
        traj.states.push(prop.state());
        traj.masses.push(prop.mass());
        traj.energies.push(prop.energy());
    };
    record(&mut prop, 0.0);
    for step in 1..=steps {
        prop.step();
        if recorded(step, steps, every) {
            record(&mut prop, step as f64 * h);
        }
    }
    Ok(traj)
}

/// Strang splitting for the scaled `N`-body Schrödinger equation
/// `i Psi_t = -(1/2) sum_k Psi_{x_k x_k} + (1/N) sum_{k<l} V(x_k - x_l) Psi`.
#[derive(Debug, Clone)]
pub struct NbodyPropagator {
    grid: Grid1D,
    particles: usize,
    fft: Fft,
    kinetic_phase: Vec<Complex64>,
    potential_phase: Vec<Complex64>,
    psi: Vec<Complex64>,
    dt: f64,
    time: f64,
}

/// `U(x_1..x_N) = (1/N) sum_{k<l} V(x_k - x_l)` on the tensor grid.
fn pair_potential(grid: &Grid1D, particles: usize, potential: &PotentialSpec, size: usize) -> Vec<f64> {
    let m = grid.len();
    let v = potential.sample(grid);
    let mut digits = vec![0usize; particles];
    let scale = 1.0 / particles as f64;
    (0..size)
        .map(|flat| {
            let mut rest = flat;
            for d in digits.iter_mut().rev() {
                *d = rest % m;
                rest /= m;
            }
            let mut u = 0.0;
            for k in 0..particles {
                for l in k + 1..particles {
                    u += v[(digits[k] + m - digits[l]) % m];
                }
            }
            scale * u
        })
        .collect()
}

fn kinetic_tensor(grid: &Grid1D, particles: usize, size: usize, dt: f64) -> Vec<Complex64> {
    let m = grid.len();
    let k2: Vec<f64> = grid.wavenumbers().iter().map(|k| k * k).collect();
    let mut digits = vec![0usize; particles];
    (0..size)
        .map(|flat| {
            let mut rest = flat;
            for d in digits.iter_mut().rev() {
                *d = rest % m;
                rest /= m;
            }
            let sum: f64 = digits.iter().map(|d| k2[*d]).sum();
            Complex64::from_polar(1.0, -0.5 * dt * sum)
        })
        .collect()
}

impl NbodyPropagator {
    pub fn new(psi: &TensorWaveFunction, potential: &PotentialSpec, dt: f64) -> Result<Self> {
        potential.validate()?;
        let norm = psi.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Normalization { norm });
        }
        let grid = *psi.grid();
        let particles = psi.particles();
        let size = check_guard(&grid, particles)?;
        let potential_phase = pair_potential(&grid, particles, potential, size)
            .into_iter()
            .map(|u| Complex64::from_polar(1.0, -0.5 * dt * u))
            .collect();
        Ok(NbodyPropagator {
            grid,
            particles,
            fft: Fft::new(grid.len()),
            kinetic_phase: kinetic_tensor(&grid, particles, size, dt),
            potential_phase,
            psi: psi.amplitudes().to_vec(),
            dt,
            time: 0.0,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn state(&self) -> TensorWaveFunction {
        TensorWaveFunction::from_raw(self.grid, self.particles, self.psi.clone())
    }

    pub fn step(&mut self) {
        for (p, phase) in self.psi.iter_mut().zip(&self.potential_phase) {
            *p *= phase;
        }
        for axis in 0..self.particles {
            self.fft.along_axis(&mut self.psi, self.particles, axis, false);
        }
        for (p, phase) in self.psi.iter_mut().zip(&self.kinetic_phase) {
            *p *= phase;
        }
        for axis in 0..self.particles {
            self.fft.along_axis(&mut self.psi, self.particles, axis, true);
        }
        for (p, phase) in self.psi.iter_mut().zip(&self.potential_phase) {
            *p *= phase;
        }
        self.time += self.dt;
    }

    pub fn norm(&self) -> f64 {
        let w = self.grid.spacing().powi(self.particles as i32);
        (w * self.psi.iter().map(|p| p.norm_sqr()).sum::<f64>()).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NbodyTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<TensorWaveFunction>,
    /// Norm after every step, not just recorded ones.
    pub step_norms: Vec<f64>,
    pub dt: f64,
}

impl NbodyTrajectory {
    pub fn final_state(&self) -> &TensorWaveFunction {
        self.states.last().expect("trajectories are never empty")
    }

    pub fn max_norm_defect(&self) -> f64 {
        self.step_norms.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// As [`solve_hartree`] for the `N`-body equation. Each recorded state holds
/// `M^N` amplitudes, so record sparingly for large tensors.
pub fn solve_nbody_schrodinger(
    psi_in: &TensorWaveFunction,
    potential: &PotentialSpec,
    t_final: f64,
    dt: f64,
    record_every: usize,
) -> Result<NbodyTrajectory> {
    let (steps, h) = step_plan(t_final, dt, psi_in.grid())?;
    let every = record_every.max(1);
    let mut prop = NbodyPropagator::new(psi_in, potential, h)?;
    let mut traj =
        NbodyTrajectory { times: vec![0.0], states: vec![prop.state()], step_norms: vec![prop.norm()], dt: h };
    for step in 1..=steps {
        prop.step();
        traj.step_norms.push(prop.norm());
        if recorded(step, steps, every) {
            traj.times.push(step as f64 * h);
            traj.states.push(prop.state());
        }
    }
    Ok(traj)
}

pub(crate) fn plan_steps(t_final: f64, dt: f64, grid: &Grid1D) -> Result<(usize, f64)> {
    step_plan(t_final, dt, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn smooth(grid: Grid1D) -> WaveFunction {
        WaveFunction::from_fn(grid, |x| {
            Complex64::new(1.0 + 0.5 * x.cos(), 0.3 * (2.0 * x).sin()) * Complex64::from_polar(1.0, x.sin())
        })
        .unwrap()
    }

    #[test]
    fn free_plane_wave_acquires_phase() {
        let g = Grid1D::periodic(32).unwrap();
        let psi = WaveFunction::plane_wave(g, 3);
        let traj = solve_hartree(&psi, &PotentialSpec::zero(), 0.5, 1e-3, 100).unwrap();
        let phase = Complex64::from_polar(1.0, -4.5 * 0.5);
        for (a, b) in traj.final_state().amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - phase * b).norm() < 1e-11);
        }
    }

    #[test]
    fn hartree_conserves_mass() {
        let g = Grid1D::periodic(32).unwrap();
        let traj = solve_hartree(&smooth(g), &PotentialSpec::Cosine { amplitude: 0.5 }, 1.0, 1e-3, 10).unwrap();
        assert!(traj.mass_defect() < 1e-12);
        assert!(traj.relative_energy_drift() < 1e-6);
    }

    #[test]
    fn time_step_bounded_by_h_squared() {
        let g = Grid1D::periodic(64).unwrap();
        assert!(solve_hartree(&smooth(g), &PotentialSpec::zero(), 1.0, 0.05, 1).is_err());
    }

    #[test]
    fn free_nbody_stays_factorized() {
        let g = Grid1D::periodic(16).unwrap();
        let psi = smooth(g);
        let t = 0.4;
        let free = solve_hartree(&psi, &PotentialSpec::zero(), t, 1e-3, 1000).unwrap();
        let many = solve_nbody_schrodinger(
            &TensorWaveFunction::power(&psi, 3).unwrap(),
            &PotentialSpec::zero(),
            t,
            1e-3,
            1000,
        )
        .unwrap();
        let expected = TensorWaveFunction::power(free.final_state(), 3).unwrap();
        let fidelity = expected.inner(many.final_state()).norm();
        assert!((fidelity - 1.0).abs() < 1e-10);
        assert!(many.max_norm_defect() < 1e-12);
    }

    #[test]
    fn pair_potential_by_hand() {
        let g = Grid1D::periodic(8).unwrap();
        let v = PotentialSpec::Cosine { amplitude: 1.0 };
        let u = pair_potential(&g, 3, &v, 512);
        // (x1, x2, x3) = (1, 4, 6) grid indices
        let flat = 64 + 4 * 8 + 6;
        let c = |d: f64| (d * PI / 4.0).cos();
        let expected = (c(3.0) + c(5.0) + c(2.0)) / 3.0;
        assert!((u[flat] - expected).abs() < 1e-14);
    }

    #[test]
    fn symmetric_data_stays_symmetric() {
        let g = Grid1D::periodic(16).unwrap();
        let a = smooth(g);
        let b = WaveFunction::plane_wave(g, 2);
        let ab = TensorWaveFunction::product(&[&a, &b]).unwrap();
        let ba = TensorWaveFunction::product(&[&b, &a]).unwrap();
        let sum: Vec<Complex64> = ab.amplitudes().iter().zip(ba.amplitudes()).map(|(x, y)| x + y).collect();
        let norm = (g.spacing().powi(2) * sum.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        let sym = TensorWaveFunction::new(g, 2, sum.iter().map(|z| z / norm).collect()).unwrap();
        let traj =
            solve_nbody_schrodinger(&sym, &PotentialSpec::SoftCoulomb { strength: 1.0, eps: 0.5 }, 0.5, 1e-2, 10)
                .unwrap();
        for s in &traj.states {
            assert!(s.symmetry_defect() <= 1e-10);
        }
    }
}
