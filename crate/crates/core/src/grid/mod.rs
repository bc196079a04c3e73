//! Discretized domains and the sparse Hamiltonian `-Δ_h + V_0 + V_ω`.

mod continuum;
mod domain;
mod hamiltonian;
mod potential;
mod sparse;

pub use continuum::continuum_box_eigenvalues;
pub use domain::{
    make_domain, BoundarySpec, Condition, Domain, GridPoint, Neighbor, Puncture, REQUIRED_BOUNDARY_DISTANCE,
};
pub use hamiltonian::{assemble_laplacian, Hamiltonian};
pub use potential::{
    assemble_potential, covering_bounds, needed_lattice_points, Background, Couplings, LatticePoint,
    PotentialStencil, SingleSiteProfile,
};
pub use sparse::CsrMatrix;
