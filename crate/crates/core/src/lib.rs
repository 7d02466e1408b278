//! Reduced-periodic and periodic orbits of a symmetric three-body family.
//!
//! The crate integrates the reduced equations (and their parameter
//! sensitivities) with an adaptive Taylor method, traces the two solution
//! curves by predictor–corrector continuation, locates the point where they
//! cross, and searches the curves for orbits whose rotation angle is a
//! rational multiple of π.

pub mod bifurcation;
pub mod boundary;
pub mod continuation;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod io;
pub mod periodic;

pub use error::{Error, Result};
