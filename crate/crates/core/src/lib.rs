//! Pseudo-spectral simulation and verification kernels for the one-dimensional
//! Muskat interface equation on a periodic domain.
//!
//! The interface graph f(x, t) lives on the torus [-L, L). The evolution is the
//! stable contour dynamics in three equivalent forms (operator split
//! `-rho (Lambda f + T(f))`, arctan divergence form, and an epsilon-regularized
//! model), integrated with an integrating-factor RK4 stepper. The crate also
//! carries every analytically proven monitor: the log conservation law, the
//! dissipation bound, maximum principles, Wiener-norm decay, the weak-form
//! residual, and the explicit small-data constants.
//!
//! The crate is `no_std` + `alloc`; all IO lives in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod constants;
pub mod contour;
pub mod diagnostics;
pub mod error;
mod fft;
pub mod initdata;
pub mod quad;
pub mod spectral;
pub mod timestepping;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
