use rayon::prelude::*;

use crate::grid_fields::{grad_sq, gradient, ScalarField, VectorField, CHUNK};
use crate::scalar::Real;
use crate::solver::{k_of, potential_w, potential_w_prime, rhs, sigma, PhaseState, SolverParams};

/// `epsilon |∇phi|^2 / 2 + W(phi) / epsilon` with the averaged one-sided squared gradient.
pub fn energy_density_of<T: Real>(phi: &ScalarField<T>, epsilon: T) -> ScalarField<T> {
    let half_eps = T::of(0.5) * epsilon;
    grad_sq(phi)
        .zip_map(phi, |g, p| half_eps * g + potential_w(p) / epsilon)
        .expect("same grid")
}

/// `(1/sigma)(epsilon |∇phi|^2 / 2 - W(phi) / epsilon)`.
pub fn discrepancy_density_of<T: Real>(phi: &ScalarField<T>, epsilon: T) -> ScalarField<T> {
    let half_eps = T::of(0.5) * epsilon;
    let s = sigma::<T>();
    grad_sq(phi)
        .zip_map(phi, |g, p| (half_eps * g - potential_w(p) / epsilon) / s)
        .expect("same grid")
}

/// `E_S = ∫ (epsilon |∇phi|^2 / 2 + W(phi) / epsilon)`.
pub fn surface_energy<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> T {
    energy_density_of(&state.phi, params.epsilon).integrate()
}

/// `E_P = (V0 - ∫k(phi))^2 / (2 epsilon^alpha)`.
pub fn penalty_energy<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> T {
    let dev = state.volume_target - state.phi.map(k_of).integrate();
    dev * dev / (T::of(2.0) * params.eps_alpha())
}

/// `mu_t(test) = (1/sigma) ∫ test (epsilon |∇phi|^2/2 + W(phi)/epsilon)`.
pub fn mu_measure<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>, test: &ScalarField<T>) -> T {
    let e = energy_density_of(&state.phi, params.epsilon);
    test.integrate_product(&e).expect("test on state grid") / sigma::<T>()
}

/// Discrepancy density and its total variation `|xi|(Omega)`.
pub fn discrepancy<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> (ScalarField<T>, T) {
    let xi = discrepancy_density_of(&state.phi, params.epsilon);
    let total = xi.map(|v| v.abs()).integrate();
    (xi, total)
}

/// `h_eps = lap phi - W'(phi)/epsilon^2`.
pub fn approx_curvature<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> ScalarField<T> {
    let inv_eps2 = T::one() / (params.epsilon * params.epsilon);
    crate::grid_fields::laplacian(&state.phi)
        .zip_map(&state.phi, |l, p| l - potential_w_prime(p) * inv_eps2)
        .expect("same grid")
}

/// `v_eps = -phi_t ∇phi / |∇phi|^2`, zero where `|∇phi| < 1e-12 / h`.
///
/// `phi_t` is the instantaneous right-hand side, and `∇` the centred gradient.
pub fn approx_velocity<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> VectorField<T> {
    let phi_t = rhs(&state.phi, state.lambda, params);
    let grad = gradient(&state.phi);
    let g = state.phi.grid();
    let threshold = T::of(1e-12) * T::of_usize(g.n());
    let d = g.dim();
    let comps = grad.components();
    let out: Vec<Vec<T>> = (0..d)
        .map(|axis| {
            (0..g.len())
                .into_par_iter()
                .with_min_len(CHUNK)
                .map(|i| {
                    let n2 = comps.iter().fold(T::zero(), |acc, c| acc + c[i] * c[i]);
                    if n2.sqrt() < threshold {
                        T::zero()
                    } else {
                        -phi_t.values()[i] * comps[axis][i] / n2
                    }
                })
                .collect()
        })
        .collect();
    VectorField::new(g, out).expect("d components")
}

/// `(1/sigma) sqrt(2W(phi)) |∇phi|`, the diffuse density of `|∇k(phi)| / sigma`.
///
/// Bounded pointwise by the `mu` density (`2 sqrt(ab) <= a + b`).
pub fn interface_density<T: Real>(phi: &ScalarField<T>) -> ScalarField<T> {
    let s = sigma::<T>();
    grad_sq(phi)
        .zip_map(phi, |g, p| crate::solver::sqrt_two_w(p) * g.sqrt() / s)
        .expect("same grid")
}
