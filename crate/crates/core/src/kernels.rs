//! Interaction kernels `K: R^d x R^d -> R^d`.
//!
//! All built-in kernels are skew-symmetric, `K(z, z') = -K(z', z)`, and all
//! except the point vortex are globally Lipschitz with a declared constant.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::measure::{distance, Configuration};
use crate::rng::Stream;

/// Anything that can act as a pairwise interaction in the N-body system.
pub trait Interaction {
    fn dim(&self) -> usize;

    /// Writes `K(z, z')` into `out`.
    fn eval_into(&self, z: &[f64], zp: &[f64], out: &mut [f64]) -> Result<()>;

    /// Declared global Lipschitz constant, `None` when unbounded.
    fn lipschitz_bound(&self) -> Option<f64>;

    /// True when the kernel is singular on the diagonal.
    fn is_singular(&self) -> bool {
        self.lipschitz_bound().is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// `(z - z') exp(-|z - z'|^2)`
    GaussianOdd,
    /// `J(z - z')` in the plane, `J(x, y) = (y, -x)`.
    LinearRotation,
    /// Biot-Savart kernel of a point vortex.
    VortexPoint,
    /// Point vortex with `|u|^2 + eps^2` in the denominator.
    VortexBlob { eps: f64 },
    /// Free transport plus mollified Coulomb force on `(x, v)` phase space.
    VlasovMollified { eps: f64, coupling: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    dim: usize,
    lipschitz: Option<f64>,
}

impl KernelSpec {
    pub fn gaussian_odd(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        // Jacobian e^{-r^2}(I - 2 u u^T) has operator norm at most 1
        Ok(KernelSpec { kind: KernelKind::GaussianOdd, dim, lipschitz: Some(1.0) })
    }

    pub fn linear_rotation() -> Self {
        KernelSpec { kind: KernelKind::LinearRotation, dim: 2, lipschitz: Some(1.0) }
    }

    pub fn vortex_point() -> Self {
        KernelSpec { kind: KernelKind::VortexPoint, dim: 2, lipschitz: None }
    }

    pub fn vortex_blob(eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidInput("blob radius must be positive".into()));
        }
        // the radial eigenvalue of the Jacobian of u/(|u|^2+eps^2) peaks at u = 0
        let l = 1.0 / (2.0 * PI * eps * eps);
        Ok(KernelSpec { kind: KernelKind::VortexBlob { eps }, dim: 2, lipschitz: Some(l) })
    }

    /// `dim` is the full phase-space dimension `2m`.
    pub fn vlasov_mollified(dim: usize, eps: f64, coupling: f64) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::InvalidInput("Vlasov phase space needs an even dimension".into()));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidInput("mollification length must be positive".into()));
        }
        let l = 1.0f64.max(coupling.abs() / (eps * eps * eps));
        Ok(KernelSpec { kind: KernelKind::VlasovMollified { eps, coupling }, dim, lipschitz: Some(l) })
    }

    /// Overrides the declared Lipschitz constant.
    pub fn with_lipschitz_bound(mut self, l: f64) -> Self {
        if self.lipschitz.is_some() {
            self.lipschitz = Some(l);
        }
        self
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn is_vortex(&self) -> bool {
        matches!(self.kind, KernelKind::VortexPoint | KernelKind::VortexBlob { .. })
    }

    /// `K(z, z')` as a fresh vector.
    pub fn evaluate(&self, z: &[f64], zp: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(z, zp, &mut out)?;
        Ok(out)
    }
}

impl Interaction for KernelSpec {
    fn dim(&self) -> usize {
        self.dim
    }

    fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz
    }

    fn eval_into(&self, z: &[f64], zp: &[f64], out: &mut [f64]) -> Result<()> {
        let d = self.dim;
        if z.len() != d || zp.len() != d || out.len() != d {
            let found = if z.len() != d {
                z.len()
            } else if zp.len() != d {
                zp.len()
            } else {
                out.len()
            };
            return Err(Error::DimensionMismatch { expected: d, found });
        }
        match self.kind {
            KernelKind::GaussianOdd => {
                let r2: f64 = z.iter().zip(zp).map(|(a, b)| (a - b) * (a - b)).sum();
                let g = (-r2).exp();
                for ((o, a), b) in out.iter_mut().zip(z).zip(zp) {
                    *o = (a - b) * g;
                }
            }
            KernelKind::LinearRotation => {
                let (ux, uy) = (z[0] - zp[0], z[1] - zp[1]);
                out[0] = uy;
                out[1] = -ux;
            }
            KernelKind::VortexPoint => {
                let (ux, uy) = (z[0] - zp[0], z[1] - zp[1]);
                let r2 = ux * ux + uy * uy;
                if r2 == 0.0 {
                    return Err(Error::CoincidentPoints);
                }
                let c = -1.0 / (2.0 * PI * r2);
                out[0] = c * uy;
                out[1] = -c * ux;
            }
            KernelKind::VortexBlob { eps } => {
                let (ux, uy) = (z[0] - zp[0], z[1] - zp[1]);
                let c = -1.0 / (2.0 * PI * (ux * ux + uy * uy + eps * eps));
                out[0] = c * uy;
                out[1] = -c * ux;
            }
            KernelKind::VlasovMollified { eps, coupling } => {
                let m = d / 2;
                let r2: f64 = (0..m).map(|k| (z[k] - zp[k]) * (z[k] - zp[k])).sum();
                let s = r2 + eps * eps;
                let c = coupling / (s * s.sqrt());
                for k in 0..m {
                    out[k] = z[m + k] - zp[m + k];
                    out[m + k] = c * (z[k] - zp[k]);
                }
            }
        }
        Ok(())
    }
}

/// Axis-aligned sampling box `[lo, hi]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox { lo: -5.0, hi: 5.0 }
    }
}

impl SampleBox {
    fn sample(&self, rng: &mut Stream, out: &mut [f64]) {
        for x in out {
            *x = rng.uniform_in(self.lo, self.hi);
        }
    }
}

/// Largest sampled `|K(z, z') + K(z', z)|`.
pub fn verify_skew<K: Interaction + ?Sized>(kernel: &K, n_samples: usize, seed: u64) -> Result<f64> {
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let d = kernel.dim();
    let mut rng = Stream::new(seed);
    let region = SampleBox::default();
    let (mut z, mut zp) = (vec![0.0; d], vec![0.0; d]);
    let (mut k1, mut k2) = (vec![0.0; d], vec![0.0; d]);
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        region.sample(&mut rng, &mut z);
        region.sample(&mut rng, &mut zp);
        kernel.eval_into(&z, &zp, &mut k1)?;
        kernel.eval_into(&zp, &z, &mut k2)?;
        let violation = k1.iter().zip(&k2).map(|(a, b)| (a + b) * (a + b)).sum::<f64>().sqrt();
        worst = worst.max(violation);
    }
    Ok(worst)
}

/// Sampled lower estimate of the Lipschitz constant over `region`.
///
/// Half of the pairs are independent uniform draws, the other half are
/// close pairs at log-uniform separations so that local derivative maxima
/// are seen. Both arguments of the kernel are perturbed.
pub fn estimate_lipschitz<K: Interaction + ?Sized>(
    kernel: &K,
    n_samples: usize,
    seed: u64,
    region: SampleBox,
) -> Result<f64> {
    if kernel.is_singular() {
        return Err(Error::UnsupportedKernel("Lipschitz estimation needs a bounded derivative"));
    }
    if n_samples == 0 {
        return Err(Error::InvalidInput("need at least one sample".into()));
    }
    let d = kernel.dim();
    let mut rng = Stream::new(seed);
    let (mut z1, mut z2, mut zp) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let (mut k1, mut k2) = (vec![0.0; d], vec![0.0; d]);
    let width = region.hi - region.lo;
    let mut best = 0.0f64;
    for s in 0..n_samples {
        region.sample(&mut rng, &mut z1);
        region.sample(&mut rng, &mut zp);
        if s % 2 == 0 {
            region.sample(&mut rng, &mut z2);
        } else {
            let scale = width * (10.0f64).powf(-4.0 * rng.uniform());
            for (b, a) in z2.iter_mut().zip(&z1) {
                *b = a + scale * (rng.uniform() - 0.5);
            }
        }
        let gap = distance(&z1, &z2);
        if gap == 0.0 {
            continue;
        }
        // first argument
        kernel.eval_into(&z1, &zp, &mut k1)?;
        kernel.eval_into(&z2, &zp, &mut k2)?;
        best = best.max(distance(&k1, &k2) / gap);
        // second argument
        kernel.eval_into(&zp, &z1, &mut k1)?;
        kernel.eval_into(&zp, &z2, &mut k2)?;
        best = best.max(distance(&k1, &k2) / gap);
    }
    Ok(best)
}

/// Point-vortex (or blob) invariants of a planar configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexInvariants {
    pub hamiltonian: f64,
    pub center: [f64; 2],
    pub moment: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservedQuantities {
    /// Weighted particle mean.
    pub mean: Vec<f64>,
    pub vortex: Option<VortexInvariants>,
}

impl ConservedQuantities {
    /// Flattened `(name, value)` pairs in a fixed order.
    pub fn named(&self) -> Vec<(alloc::string::String, f64)> {
        let mut out: Vec<_> = self.mean.iter().enumerate().map(|(k, m)| (alloc::format!("mean_{k}"), *m)).collect();
        if let Some(v) = self.vortex {
            out.push(("hamiltonian".into(), v.hamiltonian));
            out.push(("center_x".into(), v.center[0]));
            out.push(("center_y".into(), v.center[1]));
            out.push(("moment".into(), v.moment));
        }
        out
    }
}

pub fn conserved_quantities(spec: &KernelSpec, config: &Configuration) -> Result<ConservedQuantities> {
    if config.dim() != spec.dim {
        return Err(Error::DimensionMismatch { expected: spec.dim, found: config.dim() });
    }
    let mean = config.mean();
    let vortex = match spec.kind {
        KernelKind::VortexPoint | KernelKind::VortexBlob { .. } => {
            let eps2 = match spec.kind {
                KernelKind::VortexBlob { eps } => eps * eps,
                _ => 0.0,
            };
            let n = config.len();
            let w = config.weights();
            let mut h = 0.0;
            for i in 0..n {
                let xi = config.point(i);
                for j in i + 1..n {
                    let xj = config.point(j);
                    let r2 = (xi[0] - xj[0]).powi(2) + (xi[1] - xj[1]).powi(2);
                    if r2 + eps2 == 0.0 {
                        return Err(Error::CoincidentPoints);
                    }
                    h += w[i] * w[j] * 0.5 * (r2 + eps2).ln();
                }
            }
            let mut center = [0.0; 2];
            let mut moment = 0.0;
            for (x, wi) in config.iter() {
                center[0] += wi * x[0];
                center[1] += wi * x[1];
                moment += wi * (x[0] * x[0] + x[1] * x[1]);
            }
            Some(VortexInvariants { hamiltonian: -h / (4.0 * PI), center, moment })
        }
        _ => None,
    };
    Ok(ConservedQuantities { mean, vortex })
}
