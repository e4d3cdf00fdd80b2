//! Periodic grid, sampled fields and their discrete calculus.

pub mod calculus;
mod field;
mod grid;
pub mod snapshot;
pub mod spectral;

pub use calculus::{
    backward_difference, ball_indicator_sum, dirichlet_form, forward_difference, grad_sq, gradient,
    gradient_pairing, laplacian, laplacian_map,
};
pub use field::{ScalarField, VectorField};
pub(crate) use field::CHUNK;
pub use grid::TorusGrid;
pub use snapshot::{read_snapshot, write_atomic, write_snapshot};
pub use spectral::{helmholtz_solve, HelmholtzSolver};
