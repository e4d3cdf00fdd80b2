//! Phase-field simulation and verification of volume-preserving mean
//! curvature flow on the flat torus.

// `!(x > 0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brakke;
pub mod cli_io;
pub mod diagnostics;
pub mod error;
pub mod grid_fields;
pub mod initial_data;
pub mod oracle2d;
pub mod scalar;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
pub use grid_fields::{ScalarField, TorusGrid, VectorField};
pub use scalar::Real;

/// Double-precision aliases.
pub type Field = ScalarField<f64>;
pub type VecField = VectorField<f64>;
pub type State = solver::PhaseState<f64>;
pub type Params = solver::SolverParams<f64>;
pub type Profile = initial_data::InitialProfile<f64>;
