//! Dense-free linear algebra used by every solver in the crate.

pub mod banded;
pub mod lanczos;
pub mod scalar;
pub mod tridiag;

pub use banded::{BandLdl, BandedHermitian, Mass, TripletBuilder};
pub use lanczos::{count_below, eigenvalues_below, lowest_by_inertia, lowest_eigenpairs, safe_floor, EigenSlice, LanczosOptions};
pub use scalar::Scalar;
pub use tridiag::SymTridiagonal;
