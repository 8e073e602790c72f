//! Structure-preserving exponential integrators for the highly oscillatory
//! second-order system x'' = (1/ε) B x' + F(x) with skew-symmetric B.
//!
//! The crate provides six one-step methods — M1, M2, SM1–SM3 (symplectic)
//! and EM1 (energy-preserving) — whose coefficients are matrix functions of
//! hΩ = (h/ε) B, together with a verification layer that certifies their
//! structural properties (symplecticity, symmetry, energy conservation,
//! uniform-in-ε convergence, resonance behavior) numerically.
//!
//! Modules:
//! - [`spectral`]: unitary diagonalization of skew-symmetric matrices and
//!   φ-function / matrix-function evaluation.
//! - [`model`]: problem definitions, energy and Hamiltonian functionals, the
//!   canonical transform, the built-in benchmark and a linear oracle.
//! - [`integrators`]: the method engine, the six schemes, a symplectic-Euler
//!   baseline and a high-accuracy adaptive reference solver.
//! - [`verify`]: structure checkers, drift statistics, convergence tables,
//!   resonance scans and the certification battery.
//! - [`harness`]: experiment configuration, CLI and CSV emission.

pub mod error;
pub mod harness;
pub mod integrators;
pub mod model;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
