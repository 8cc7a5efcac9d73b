//! Exactly solvable and fiber-decomposable model operators.

mod cylinder;
mod lieb_thirring;
mod square;
mod torus;

pub use cylinder::{
    assemble_cylinder, cylinder_energy, cylinder_fiber_spectrum, cylinder_spectrum, cylinder_spectrum_below,
    fiber_spectrum, CylinderGrid, CylinderModel, FiberValue, HalfPlaneModel,
};
pub use lieb_thirring::{lt_bound_check, lt_classical_constant, BoundaryPotential, LtCheck, LtGrid};
pub use square::{assemble_dirichlet_square, dirichlet_square_count, nu_b, SquareGrid};
pub use torus::{
    assemble_torus, clusters, torus_count_below, torus_landau_spectrum, Cluster, TorusGrid, TorusModel, TorusSpectrum,
};
