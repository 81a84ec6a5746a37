//! Transfinite diameter, Chebyshev constant and Wiener energy of positive
//! symmetric kernels on finite spaces.
//!
//! The crate works on finite point sets, either given abstractly by a kernel
//! matrix or obtained by discretizing an interval or a circle. On such sets
//! it computes
//!
//! - the n-th diameters `D_n` and Fekete point systems ([`diameter`]),
//! - the n-th Chebyshev constants `M_n` of log-polynomials ([`chebyshev`]),
//! - the Wiener energy `w`, the minimax energies `u`, `v`, `q`, equilibrium
//!   measures and rendezvous numbers ([`energy`]),
//! - a decision procedure for the Frostman maximum principle ([`principles`]).
//!
//! Computations run either in exact rational arithmetic or in `f64`; see
//! [`numerics`].

pub mod chebyshev;
pub mod diameter;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod kernel;
mod linalg;
pub mod measure;
pub mod numerics;
pub mod principles;
pub mod report;
pub mod trace;
pub mod verify;

pub use error::{Error, Result};
pub use kernel::{
    build_kernel, grid_discretize, restrict, shift_kernel, FiniteSpace, Kernel, KernelSpec, Point,
};
pub use measure::{energy, potential, sup_potential, DiscreteMeasure, Over, PotentialVector};
pub use numerics::{ext_add, ext_scale, ArithmeticMode, Certification, ExtReal, Rational, Scalar, SolverOptions};
