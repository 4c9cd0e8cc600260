//! Weak-field coherent control of electronic population decay through
//! overlapping resonances.
//!
//! The crate models a set of quasi-bound resonances |κ⟩ decaying into a dense
//! manifold represented by coarse-grained states |ᾱ⟩. It provides:
//!
//! - a synthetic resonance-system generator and a second-level binning
//!   reduction ([`system`]),
//! - Gaussian pulse bases with analytic finite-time Fourier transforms built
//!   on the Faddeeva function ([`pulse`]),
//! - coarse-grained propagation kernels and population evaluation
//!   ([`dynamics`]),
//! - absolute and relative control eigenproblems for the optimal excitation
//!   spectrum ([`control`]),
//! - non-diagonality measures correlating overlap with controllability
//!   ([`diagnostics`]),
//! - field-simplification experiments (averaging, smoothing, truncation)
//!   ([`simplify`]).
//!
//! Units throughout: energies in eV, times in fs, angular frequencies in
//! rad/fs.

pub mod control;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod pulse;
pub mod simplify;
pub mod system;

pub use error::{Error, Result};

/// Reduced Planck constant in eV·fs (CODATA).
pub const HBAR_EV_FS: f64 = 0.6582119569;

pub(crate) type C64 = num_complex::Complex64;
pub(crate) type CMatrix = nalgebra::DMatrix<C64>;
pub(crate) type CVector = nalgebra::DVector<C64>;
