//! Time integration of the nonlocal Allen–Cahn equation
//! `phi_t = lap phi - W'(phi)/eps^2 + (lambda/eps) sqrt(2 W(phi))`,
//! `lambda = (∫k(phi0) - ∫k(phi)) / eps^alpha`.

mod params;
pub mod potential;
mod state;
mod stepper;

pub use params::{cfl_bound, Scheme, SolverParams, AUTO_DT_FRACTION};
pub use potential::{k_of, potential_w, potential_w_prime, sigma, sqrt_two_w};
pub use state::{lambda_eps, multiplier, volume_k, PhaseState};
pub use stepper::{rhs, run, run_from, step, Observer, RunFailure, Stepper, OVERSHOOT_LIMIT};
