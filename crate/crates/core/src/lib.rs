//! Numerical laboratory for mean-field limits of interacting particle systems.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerics:
//!
//! * [`kernels`]: skew-symmetric interaction kernels, including point vortices
//!   and their blob regularisation, with sampling-based verification.
//! * [`dynamics`]: the scaled N-body system, the mean-field characteristic
//!   flow by Picard iteration and weak-form residuals.
//! * [`transport`]: exact Monge-Kantorovich distances between finite
//!   measures and Kantorovich-Rubinstein dual certificates.
//! * [`chaos`]: i.i.d. sampling, propagation-of-chaos statistics and the
//!   stability and rate experiments built on top of them.
//! * [`hierarchy`]: the linear hierarchy `y_k' = k y_{k+1}` and its closures.
//! * [`quantum`]: Hartree and N-body Schrödinger dynamics on a periodic grid,
//!   reduced density matrices and the Pickl functional.
//!
//! File formats, configuration and the command line live in the `meanfield`
//! companion crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod chaos;
pub mod dynamics;
pub mod error;
pub mod fft;
pub mod hierarchy;
pub mod kernels;
pub mod linalg;
pub mod measure;
pub mod quantum;
pub mod rng;
pub mod stats;
pub mod transport;

pub use error::{Error, Result};
