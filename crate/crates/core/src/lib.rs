//! Band functions of the half-line Robin oscillator and semiclassical
//! eigenvalue sums for the two-dimensional magnetic Robin Laplacian.

pub mod band1d;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod model_spectra;
pub mod ode;
pub mod quad;
pub mod semiclassical;
pub mod solver2d;

pub use error::{Error, Result};
