//! The scaled N-body system, the mean-field characteristic flow and the weak
//! form of the mean-field equation along particle trajectories.
//!
//! Particles move by `z_i' = sum_j w_j K(z_i, z_j)`. With uniform weights
//! `1/N` this is the usual mean-field scaling; with vortex intensities it is
//! the point-vortex (or blob) system.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::Interaction;
use crate::measure::{distance, Configuration, EmpiricalMeasure};

/// Minimal pairwise distance below which singular kernels report a collision.
pub const COLLISION_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorSettings {
    pub method: Method,
    pub dt: f64,
    /// Keep every `record_every`-th step (the final state is always kept).
    pub record_every: usize,
    /// When set, the run is repeated at `dt/2` and the Richardson estimate of
    /// the endpoint error must stay below this value.
    pub substep_tolerance: Option<f64>,
}

impl IntegratorSettings {
    pub fn rk4(dt: f64) -> Self {
        IntegratorSettings { method: Method::Rk4, dt, record_every: 1, substep_tolerance: None }
    }

    pub fn recording_every(mut self, stride: usize) -> Self {
        self.record_every = stride.max(1);
        self
    }

    pub fn validated(mut self, tolerance: f64) -> Self {
        self.substep_tolerance = Some(tolerance);
        self
    }
}

/// Recorded states of one N-body run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    template: Configuration,
    /// Step actually used (the requested one, shrunk to land on `t_final`).
    pub dt: f64,
    pub method: Method,
    pub estimated_error: Option<f64>,
}

impl Trajectory {
    /// Recorded times, monotone in the direction of integration.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn points(&self, k: usize) -> &[f64] {
        &self.states[k]
    }

    pub fn state(&self, k: usize) -> Configuration {
        self.template.with_points(self.states[k].clone()).expect("shape fixed at construction")
    }

    pub fn final_state(&self) -> Configuration {
        self.state(self.len() - 1)
    }

    pub fn dim(&self) -> usize {
        self.template.dim()
    }

    pub fn weights(&self) -> &[f64] {
        self.template.weights()
    }
}

/// `out_i = sum_{j != i} w_j K(z_i, z_j)`, j ascending.
pub fn velocity_field<K: Interaction + ?Sized>(
    kernel: &K,
    dim: usize,
    points: &[f64],
    weights: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let mut k = vec![0.0; dim];
    for (i, vi) in out.chunks_exact_mut(dim).enumerate() {
        vi.fill(0.0);
        let zi = &points[i * dim..(i + 1) * dim];
        for (j, (zj, wj)) in points.chunks_exact(dim).zip(weights).enumerate() {
            if i == j {
                continue;
            }
            kernel.eval_into(zi, zj, &mut k)?;
            for (v, kk) in vi.iter_mut().zip(&k) {
                *v += wj * kk;
            }
        }
    }
    Ok(())
}

/// Mean-field velocity `(K mu)(z) = sum_j w_j K(z, z_j)` at an arbitrary point.
pub fn mean_field_velocity<K: Interaction + ?Sized>(
    kernel: &K,
    mu: &EmpiricalMeasure,
    z: &[f64],
    out: &mut [f64],
) -> Result<()> {
    let mut k = vec![0.0; mu.dim()];
    out.fill(0.0);
    for (zj, wj) in mu.iter() {
        kernel.eval_into(z, zj, &mut k)?;
        for (v, kk) in out.iter_mut().zip(&k) {
            *v += wj * kk;
        }
    }
    Ok(())
}

fn min_pairwise_distance(dim: usize, points: &[f64]) -> f64 {
    let n = points.len() / dim;
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            best = best.min(distance(&points[i * dim..(i + 1) * dim], &points[j * dim..(j + 1) * dim]));
        }
    }
    best
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4Workspace {
    fn new(len: usize) -> Self {
        Rk4Workspace {
            k1: vec![0.0; len],
            k2: vec![0.0; len],
            k3: vec![0.0; len],
            k4: vec![0.0; len],
            stage: vec![0.0; len],
        }
    }

    fn step<K: Interaction + ?Sized>(
        &mut self,
        kernel: &K,
        dim: usize,
        weights: &[f64],
        state: &mut [f64],
        h: f64,
    ) -> Result<()> {
        velocity_field(kernel, dim, state, weights, &mut self.k1)?;
        for ((s, z), k) in self.stage.iter_mut().zip(state.iter()).zip(&self.k1) {
            *s = z + 0.5 * h * k;
        }
        velocity_field(kernel, dim, &self.stage, weights, &mut self.k2)?;
        for ((s, z), k) in self.stage.iter_mut().zip(state.iter()).zip(&self.k2) {
            *s = z + 0.5 * h * k;
        }
        velocity_field(kernel, dim, &self.stage, weights, &mut self.k3)?;
        for ((s, z), k) in self.stage.iter_mut().zip(state.iter()).zip(&self.k3) {
            *s = z + h * k;
        }
        velocity_field(kernel, dim, &self.stage, weights, &mut self.k4)?;
        for (i, z) in state.iter_mut().enumerate() {
            *z += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidInput("time step must be positive".into()));
    }
    if !t_final.is_finite() {
        return Err(Error::InvalidInput("final time must be finite".into()));
    }
    Ok((t_final.abs() / dt - 1e-9).ceil().max(0.0) as usize)
}

fn integrate<K: Interaction + ?Sized>(
    kernel: &K,
    initial: &Configuration,
    t_final: f64,
    dt: f64,
    record_every: usize,
) -> Result<Trajectory> {
    let dim = initial.dim();
    if kernel.dim() != dim {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), found: dim });
    }
    let steps = step_count(t_final, dt)?;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let singular = kernel.is_singular();
    let weights = initial.weights();
    let mut state = initial.points().to_vec();
    let mut work = Rk4Workspace::new(state.len());
    let mut times = vec![0.0];
    let mut states = vec![state.clone()];
    let check_collision = |t: f64, state: &[f64]| -> Result<()> {
        if singular {
            let d = min_pairwise_distance(dim, state);
            if d < COLLISION_THRESHOLD {
                return Err(Error::Collision { time: t, min_distance: d });
            }
        }
        Ok(())
    };
    check_collision(0.0, &state)?;
    for s in 0..steps {
        let t = s as f64 * h;
        work.step(kernel, dim, weights, &mut state, h).map_err(|e| match e {
            Error::CoincidentPoints => Error::Collision { time: t, min_distance: 0.0 },
            other => other,
        })?;
        let t_next = (s + 1) as f64 * h;
        if state.iter().any(|x| !x.is_finite()) {
            return Err(Error::BlowUp { time: t_next });
        }
        check_collision(t_next, &state)?;
        if (s + 1) % record_every == 0 || s + 1 == steps {
            times.push(t_next);
            states.push(state.clone());
        }
    }
    Ok(Trajectory { times, states, template: initial.clone(), dt: h.abs(), method: Method::Rk4, estimated_error: None })
}

/// Fixed-step RK4 solution of the weighted N-body system up to `t_final`
/// (which may be negative).
pub fn simulate_nbody<K: Interaction + ?Sized>(
    kernel: &K,
    initial: &Configuration,
    t_final: f64,
    settings: &IntegratorSettings,
) -> Result<Trajectory> {
    let mut trajectory = integrate(kernel, initial, t_final, settings.dt, settings.record_every)?;
    if let Some(tolerance) = settings.substep_tolerance {
        let fine = integrate(kernel, initial, t_final, settings.dt / 2.0, usize::MAX)?;
        let coarse_end = trajectory.points(trajectory.len() - 1);
        let fine_end = fine.points(fine.len() - 1);
        let diff = coarse_end.iter().zip(fine_end).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let estimated = diff * 16.0 / 15.0;
        if estimated > tolerance {
            return Err(Error::StepValidation { estimated, tolerance });
        }
        trajectory.estimated_error = Some(estimated);
    }
    Ok(trajectory)
}

/// Output of the Picard construction of the characteristic flow.
#[derive(Debug, Clone)]
pub struct PicardFlow {
    dim: usize,
    /// `Z(t_final, zeta)` for each query point, flat.
    pub values: Vec<f64>,
    /// `d_n = sup_{s, query} |Z_{n+1}(s, zeta) - Z_n(s, zeta)| / (1 + |zeta|)`.
    pub deviations: Vec<f64>,
    /// `C_1 = int |z| mu_in(dz)`.
    pub first_moment: f64,
}

impl PicardFlow {
    pub fn value(&self, q: usize) -> &[f64] {
        &self.values[q * self.dim..(q + 1) * self.dim]
    }

    pub fn iterations(&self) -> usize {
        self.deviations.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    pub max_iters: usize,
    /// Spacing of the trapezoidal time grid.
    pub quadrature_dt: f64,
    /// Stop once `d_n` falls below this.
    pub tolerance: f64,
}

impl Default for PicardSettings {
    fn default() -> Self {
        PicardSettings { max_iters: 80, quadrature_dt: 1e-3, tolerance: 1e-13 }
    }
}

/// Mean-field characteristic flow `Z(t_final, zeta, mu_in)` by Picard
/// iteration of
///
/// `Z_{n+1}(t, zeta) = zeta + int_0^t int K(Z_n(s, zeta), Z_n(s, zeta')) mu_in(dzeta') ds`
///
/// with the time integral discretised by the trapezoidal rule. The iterates
/// are carried for the atoms of `mu_in` (which drive the field) and for the
/// query points.
pub fn characteristic_flow_picard<K: Interaction + ?Sized>(
    kernel: &K,
    mu_in: &EmpiricalMeasure,
    query_points: &[f64],
    t_final: f64,
    settings: &PicardSettings,
) -> Result<PicardFlow> {
    let dim = mu_in.dim();
    if kernel.dim() != dim {
        return Err(Error::DimensionMismatch { expected: kernel.dim(), found: dim });
    }
    if query_points.len() % dim != 0 {
        return Err(Error::InvalidInput("query points do not match the dimension".into()));
    }
    let first_moment = mu_in.iter().map(|(z, w)| w * z.iter().map(|x| x * x).sum::<f64>().sqrt()).sum();
    let steps = step_count(t_final, settings.quadrature_dt)?;
    if steps == 0 {
        return Ok(PicardFlow { dim, values: query_points.to_vec(), deviations: Vec::new(), first_moment });
    }
    let h = t_final / steps as f64;
    let n_atoms = mu_in.len();
    let n_query = query_points.len() / dim;
    let tracked = n_atoms + n_query;
    let width = tracked * dim;
    let mut initial = Vec::with_capacity(width);
    initial.extend_from_slice(mu_in.points());
    initial.extend_from_slice(query_points);
    let query_scale: Vec<f64> =
        query_points.chunks_exact(dim).map(|z| 1.0 + z.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();

    // iterate values on the grid: z[k * width + p * dim + c]
    let mut current: Vec<f64> = (0..=steps).flat_map(|_| initial.iter().copied()).collect();
    let mut next = current.clone();
    let mut field = vec![0.0; (steps + 1) * width];
    let mut kbuf = vec![0.0; dim];
    let mut deviations = Vec::new();
    let weights = mu_in.weights();
    for _ in 0..settings.max_iters {
        for k in 0..=steps {
            let slice = &current[k * width..(k + 1) * width];
            let atoms = &slice[..n_atoms * dim];
            for p in 0..tracked {
                let zp = &slice[p * dim..(p + 1) * dim];
                let out = &mut field[k * width + p * dim..k * width + (p + 1) * dim];
                out.fill(0.0);
                for (zj, wj) in atoms.chunks_exact(dim).zip(weights) {
                    kernel.eval_into(zp, zj, &mut kbuf)?;
                    for (o, kv) in out.iter_mut().zip(&kbuf) {
                        *o += wj * kv;
                    }
                }
            }
        }
        next[..width].copy_from_slice(&initial);
        for k in 1..=steps {
            for c in 0..width {
                next[k * width + c] =
                    next[(k - 1) * width + c] + 0.5 * h * (field[(k - 1) * width + c] + field[k * width + c]);
            }
        }
        let mut dev = 0.0f64;
        for k in 0..=steps {
            for (q, scale) in query_scale.iter().enumerate() {
                let off = k * width + (n_atoms + q) * dim;
                let gap = distance(&next[off..off + dim], &current[off..off + dim]);
                dev = dev.max(gap / scale);
            }
        }
        if !dev.is_finite() {
            return Err(Error::BlowUp { time: t_final });
        }
        deviations.push(dev);
        core::mem::swap(&mut current, &mut next);
        if dev <= settings.tolerance {
            let last = &current[steps * width..(steps + 1) * width];
            return Ok(PicardFlow { dim, values: last[n_atoms * dim..].to_vec(), deviations, first_moment });
        }
    }
    Err(Error::IterationLimit { iterations: settings.max_iters, deviations })
}

/// `((2 + C_1) L |t|) / n`, the factorial-decay ceiling for `d_{n+1}/d_n`.
pub fn picard_ratio_bound(first_moment: f64, lipschitz: f64, t: f64, n: usize) -> f64 {
    (2.0 + first_moment) * lipschitz * t.abs() / n as f64
}

/// Transports the atoms of `mu_in` to `flow_values`, keeping the weights.
pub fn pushforward(flow_values: &[f64], mu_in: &EmpiricalMeasure) -> Result<EmpiricalMeasure> {
    mu_in.with_points(flow_values.to_vec())
}

/// A test function supplied with its gradient.
pub struct TestFunction<'a> {
    pub value: &'a dyn Fn(&[f64]) -> f64,
    pub gradient: &'a dyn Fn(&[f64], &mut [f64]),
}

impl core::fmt::Debug for TestFunction<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str("TestFunction")
    }
}

/// `| d/dt <mu(t), phi> - <mu(t), (K mu(t)) . grad phi> |` at the recorded
/// time nearest to `t`, with a centred difference for the time derivative.
pub fn weak_solution_residual<K: Interaction + ?Sized>(
    kernel: &K,
    trajectory: &Trajectory,
    phi: &TestFunction<'_>,
    t: f64,
) -> Result<f64> {
    let times = trajectory.times();
    let k = times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map(|(i, _)| i)
        .ok_or(Error::NeedsInteriorPoint { time: t })?;
    if k == 0 || k + 1 >= times.len() {
        return Err(Error::NeedsInteriorPoint { time: t });
    }
    let before = trajectory.state(k - 1).integrate(phi.value);
    let after = trajectory.state(k + 1).integrate(phi.value);
    let derivative = (after - before) / (times[k + 1] - times[k - 1]);

    let mu = trajectory.state(k);
    let dim = mu.dim();
    let mut v = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    let mut transport = 0.0;
    for (z, w) in mu.iter() {
        mean_field_velocity(kernel, &mu, z, &mut v)?;
        (phi.gradient)(z, &mut g);
        transport += w * v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok((derivative - transport).abs())
}
