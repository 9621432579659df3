//! Schlömilch-type distributions on the probability simplex: densities,
//! normalizing constants, samplers and moment computations, together with the
//! supporting special functions, simplex quadrature and symmetric polynomials.

pub mod analytics;
pub mod distributions;
pub mod error;
pub mod normalization;
pub mod numeric;
pub mod quadrature;
pub mod specialfn;
pub mod stats;
pub mod sympoly;
pub mod verify;

pub use error::{Error, Result};
