//! Pseudospectral laboratory for the damped nonlinear Schrödinger equation
//! `i∂_t u + Δu + iau = μ|u|^{p-1}u` on a periodic box.
//!
//! The modules build on each other: [`spectral`] supplies grids, the unitary
//! transform and norms; [`propagators`] the free group in multiplier and
//! factorized form; [`solver`] the split-step integrator of the gauged
//! equation and the Picard iteration; [`scattering`] the scattering state,
//! error curves and rate fits; [`modspace`] the short-time Fourier transform
//! and `M^{1,1}` estimates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gamma;
pub mod modspace;
pub mod propagators;
pub mod scattering;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
