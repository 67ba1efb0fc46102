//! Numerical laboratory for time-harmonic magnetic Schrödinger scattering.

pub mod boundary;
pub mod cgo;
pub mod dirichlet;
pub mod error;
pub mod field;
pub mod forward;
pub mod gmres;
pub mod io;
pub mod potentials;
pub mod reconstruct;
pub mod sphere;
pub mod spherical;

pub use error::{Error, Result};
pub use field::{BoxGrid, ScalarField, SpectralField, VectorField3};
pub use num_complex::Complex64;
