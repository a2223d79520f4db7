//! The linear hierarchy `y_k' = k y_{k+1}` with `y_k(0) = x_in^k`.
//!
//! Its factorized solution is `y_k = x(t)^k` with `x' = x^2`, which blows up at
//! `t = 1 / x_in`. Truncating at level `K` needs a closure for `y_{K+1}`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Magnitude treated as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Closure {
    /// `y_{K+1} = 0`
    Zero,
    /// `y_{K+1} = y_1^{K+1}`
    Factorized,
}

/// `y_1 ... y_K` of the closed-form solution at time `t`.
pub fn riccati_reference(x_in: f64, t: f64, levels: usize) -> Result<Vec<f64>> {
    if t * x_in >= 1.0 {
        return Err(Error::BlowUp { time: 1.0 / x_in });
    }
    let x = x_in / (1.0 - t * x_in);
    Ok((1..=levels as i32).map(|k| x.powi(k)).collect())
}

/// A truncated hierarchy sampled on the RK4 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyTrajectory {
    pub levels: usize,
    pub closure: Closure,
    pub times: Vec<f64>,
    /// `states[n][k - 1] = y_k(times[n])`
    pub states: Vec<Vec<f64>>,
}

impl HierarchyTrajectory {
    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectories are never empty")
    }

    /// `max_k |y_k - y_1^k|` over the whole trajectory.
    pub fn factorization_defect(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|y| {
                let y1 = y[0];
                y.iter().enumerate().map(move |(k, yk)| (yk - y1.powi(k as i32 + 1)).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Same as [`factorization_defect`](Self::factorization_defect), relative
    /// to `max(1, |y_1^k|)`.
    pub fn relative_factorization_defect(&self) -> f64 {
        self.states
            .iter()
            .flat_map(|y| {
                let y1 = y[0];
                y.iter().enumerate().map(move |(k, yk)| {
                    let target = y1.powi(k as i32 + 1);
                    (yk - target).abs() / target.abs().max(1.0)
                })
            })
            .fold(0.0, f64::max)
    }
}

fn rhs(y: &[f64], closure: Closure, out: &mut [f64]) {
    let levels = y.len();
    for k in 1..levels {
        out[k - 1] = k as f64 * y[k];
    }
    out[levels - 1] = match closure {
        Closure::Zero => 0.0,
        Closure::Factorized => levels as f64 * y[0].powi(levels as i32 + 1),
    };
}

/// RK4 on the truncated system with `ceil(t_final / dt)` equal steps.
pub fn solve_truncated(
    x_in: f64,
    levels: usize,
    closure: Closure,
    t_final: f64,
    dt: f64,
) -> Result<HierarchyTrajectory> {
    if levels == 0 {
        return Err(Error::InvalidInput("truncation level must be at least 1".into()));
    }
    if !(dt > 0.0) || !(t_final >= 0.0) {
        return Err(Error::InvalidInput("need dt > 0 and t_final >= 0".into()));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t_final / steps as f64 };
    let mut y: Vec<f64> = (1..=levels as i32).map(|k| x_in.powi(k)).collect();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; levels], vec![0.0; levels], vec![0.0; levels], vec![0.0; levels], vec![0.0; levels]);
    for step in 1..=steps {
        rhs(&y, closure, &mut k1);
        for i in 0..levels {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        rhs(&tmp, closure, &mut k2);
        for i in 0..levels {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        rhs(&tmp, closure, &mut k3);
        for i in 0..levels {
            tmp[i] = y[i] + h * k3[i];
        }
        rhs(&tmp, closure, &mut k4);
        for i in 0..levels {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let time = step as f64 * h;
        if y.iter().any(|v| !(v.abs() <= BLOW_UP_THRESHOLD)) {
            return Err(Error::BlowUp { time });
        }
        times.push(time);
        states.push(y.clone());
    }
    Ok(HierarchyTrajectory { levels, closure, times, states })
}

/// Per-level `max_t |y_k(t)|` and the smallest `R` with `max_t |y_k| <= R^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    pub max_abs: Vec<f64>,
    pub radius: f64,
}

pub fn growth_profile(trajectory: &HierarchyTrajectory) -> GrowthProfile {
    let mut max_abs = vec![0.0f64; trajectory.levels];
    for y in &trajectory.states {
        for (m, v) in max_abs.iter_mut().zip(y) {
            *m = m.max(v.abs());
        }
    }
    let radius = max_abs.iter().enumerate().map(|(k, m)| m.powf(1.0 / (k + 1) as f64)).fold(0.0, f64::max);
    GrowthProfile { max_abs, radius }
}
