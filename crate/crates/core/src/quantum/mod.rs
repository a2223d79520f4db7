//! Quantum mean-field checks on a periodic one-dimensional grid.
//!
//! Wave functions are stored as grid values `psi(x_j)` normalised by
//! `h sum |psi_j|^2 = 1`. Density matrices are stored in the orthonormal
//! basis `delta_j / sqrt(h)`, so their traces, eigenvalues, trace norms and
//! Frobenius norms are the continuum quantities of the grid operator.

mod density;
mod evolution;
mod grid;

pub use density::{
    bbgky_residual, hartree_limit_experiment, hartree_limit_series, kinetic_matrix, pickl_bound, pickl_functional,
    reduced_density, trace_norm, DensityMatrix, QuantumLimitReport, QuantumSeries, DEFAULT_HOLDER_EXPONENT,
};
pub use evolution::{
    solve_hartree, solve_nbody_schrodinger, HartreePropagator, HartreeTrajectory, NbodyPropagator, NbodyTrajectory,
};
pub use grid::{Grid1D, PotentialSpec, TensorWaveFunction, WaveFunction, MEMORY_GUARD};
