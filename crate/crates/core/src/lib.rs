//! Fast preconditioned solvers for the 3D Helmholtz equation with absorbing
//! boundary conditions.
//!
//! The crate provides second-, fourth- and sixth-order compact finite
//! difference operators, two fast direct solvers for the second-order
//! constant-coefficient operator (an eigenvector-transform solver and a
//! sine-transform solver with sparse boundary correction), restarted GMRES,
//! the one-dimensional model problem, and the two standard test problems.

pub mod dst;
pub mod eig;
pub mod eigt;
pub mod error;
pub mod fftref;
pub mod field;
pub mod grid;
pub mod krylov;
pub mod linalg;
pub mod model1d;
pub mod pfft;
pub mod problems;
pub mod stencil;
pub mod tridiag;

pub use error::{Error, Result};
pub use field::{norms, Field3, NormReport};
pub use grid::{Axis, Grid3, Placement};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;
