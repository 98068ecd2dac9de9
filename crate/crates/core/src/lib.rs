//! Numerical laboratory for mixed-norm Strichartz estimates and local
//! well-posedness of nonlinear Schrödinger and wave equations with data
//! that is regular only in some of the variables.
//!
//! The space is split as `R^{N-k} x R^k` with coordinates `(x, y)`; on a
//! grid the last `k` axes are the y-axes.

pub mod error;
pub mod exponents;
pub mod kernel;
pub mod norms;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
