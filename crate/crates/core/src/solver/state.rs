use super::params::SolverParams;
use super::potential::k_of;
use crate::grid_fields::ScalarField;
use crate::initial_data::InitialProfile;
use crate::scalar::Real;

/// Phase field at one time level with its cached multiplier.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseState<T> {
    pub phi: ScalarField<T>,
    /// Number of steps taken; `t = step * dt`.
    pub step: u64,
    pub t: T,
    pub lambda: T,
    /// `V0 = ∫ k(phi0)`.
    pub volume_target: T,
}

/// `∫ k(phi)`.
pub fn volume_k<T: Real>(phi: &ScalarField<T>) -> T {
    phi.integrate_with(k_of)
}

/// `lambda = (V0 - ∫ k(phi)) / epsilon^alpha`.
pub fn multiplier<T: Real>(phi: &ScalarField<T>, volume_target: T, params: &SolverParams<T>) -> T {
    (volume_target - volume_k(phi)) / params.eps_alpha()
}

impl<T: Real> PhaseState<T> {
    pub fn new(phi: ScalarField<T>, step: u64, volume_target: T, params: &SolverParams<T>) -> Self {
        let lambda = multiplier(&phi, volume_target, params);
        Self {
            t: T::from_u64(step).unwrap() * params.dt,
            phi,
            step,
            lambda,
            volume_target,
        }
    }

    pub fn initial(profile: &InitialProfile<T>, params: &SolverParams<T>) -> Self {
        Self::new(profile.phi0.clone(), 0, profile.volume_target, params)
    }
}

/// Recomputes `lambda` from the state's phase field.
pub fn lambda_eps<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> T {
    multiplier(&state.phi, state.volume_target, params)
}
