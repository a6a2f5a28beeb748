//! Self-adjoint point-interaction extensions of fractional Laplacians.

pub mod closure;
pub mod error;
pub mod highrank;
pub mod io;
pub mod kernels;
pub mod operators;
pub mod params;
pub mod quad;
pub mod radial;
pub mod spectral;

pub use error::{Error, Result};

pub type Real = f64;
pub type Complex = num_complex::Complex64;
