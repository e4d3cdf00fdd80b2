use super::params::{Scheme, SolverParams};
use super::potential::{potential_w_prime, sqrt_two_w};
use super::state::PhaseState;
use crate::error::{Error, Result};
use crate::grid_fields::{laplacian_map, HelmholtzSolver, ScalarField};
use crate::initial_data::InitialProfile;
use crate::scalar::Real;

/// Largest `|phi|` accepted after a step.
pub const OVERSHOOT_LIMIT: f64 = 1.05;

/// Reaction and multiplier part: `-W'(phi)/eps^2 + (lambda/eps) sqrt(2W(phi))`.
#[inline]
fn reaction<T: Real>(p: T, lambda_over_eps: T, inv_eps2: T) -> T {
    -potential_w_prime(p) * inv_eps2 + lambda_over_eps * sqrt_two_w(p)
}

/// `phi_t = lap phi - W'(phi)/eps^2 + (lambda/eps) sqrt(2W(phi))`.
pub fn rhs<T: Real>(phi: &ScalarField<T>, lambda: T, params: &SolverParams<T>) -> ScalarField<T> {
    let inv_eps2 = T::one() / (params.epsilon * params.epsilon);
    let le = lambda / params.epsilon;
    laplacian_map(phi, |lap, p| lap + reaction(p, le, inv_eps2))
}

/// Advances [`PhaseState`]s with a fixed scheme; caches the Fourier solver.
pub struct Stepper<T: Real> {
    params: SolverParams<T>,
    helmholtz: Option<HelmholtzSolver<T>>,
}

impl<T: Real> Stepper<T> {
    pub fn new(params: SolverParams<T>) -> Result<Self> {
        params.validate()?;
        let helmholtz = match params.scheme {
            Scheme::Imex => Some(HelmholtzSolver::new(params.grid)),
            Scheme::Explicit => None,
        };
        Ok(Self { params, helmholtz })
    }

    pub fn params(&self) -> &SolverParams<T> {
        &self.params
    }

    pub fn step(&self, state: &PhaseState<T>) -> Result<PhaseState<T>> {
        let p = &self.params;
        let dt = p.dt;
        let next_step = state.step + 1;
        let next_t = T::from_u64(next_step).unwrap() * dt;
        let phi = match &self.helmholtz {
            None => {
                let inv_eps2 = T::one() / (p.epsilon * p.epsilon);
                let le = state.lambda / p.epsilon;
                laplacian_map(&state.phi, |lap, v| v + dt * (lap + reaction(v, le, inv_eps2)))
            }
            Some(solver) => {
                let inv_eps2 = T::one() / (p.epsilon * p.epsilon);
                let le = state.lambda / p.epsilon;
                let inv_dt = T::one() / dt;
                let source = state.phi.map(|v| v * inv_dt + reaction(v, le, inv_eps2));
                solver.solve(&source, inv_dt, T::one()).map_err(|e| match e {
                    Error::NonFinite(_) => Error::Instability {
                        t: next_t.as_f64(),
                        reason: "non-finite value".into(),
                    },
                    other => other,
                })?
            }
        };
        let peak = phi.values().iter().fold(T::zero(), |m, v| if v.abs() > m || v.is_nan() { v.abs() } else { m });
        if !peak.is_finite() {
            return Err(Error::Instability {
                t: next_t.as_f64(),
                reason: "non-finite value".into(),
            });
        }
        if peak > T::of(OVERSHOOT_LIMIT) {
            return Err(Error::Instability {
                t: next_t.as_f64(),
                reason: format!("|phi| = {peak} exceeds {OVERSHOOT_LIMIT}"),
            });
        }
        Ok(PhaseState::new(phi, next_step, state.volume_target, p))
    }
}

/// Single step; builds the scheme's operators on every call.
pub fn step<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>) -> Result<PhaseState<T>> {
    Stepper::new(params.clone())?.step(state)
}

/// Receives recorded states during [`run`]. Must not mutate the state.
pub trait Observer<T: Real> {
    fn observe(&mut self, state: &PhaseState<T>, params: &SolverParams<T>);
}

impl<T: Real, F> Observer<T> for F
where
    F: FnMut(&PhaseState<T>, &SolverParams<T>),
{
    fn observe(&mut self, state: &PhaseState<T>, params: &SolverParams<T>) {
        self(state, params)
    }
}

/// Failed run: the error and the last state that passed the stability check.
#[derive(Debug)]
pub struct RunFailure<T> {
    pub error: Error,
    pub last_stable: Box<PhaseState<T>>,
}

impl<T> std::fmt::Display for RunFailure<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.error)
    }
}

/// Integrates from the profile to `t_final`.
pub fn run<T: Real>(
    params: &SolverParams<T>,
    profile: &InitialProfile<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> std::result::Result<PhaseState<T>, RunFailure<T>> {
    if profile.phi0.grid() != params.grid {
        let error = Error::GridMismatch("profile grid differs from solver grid".into());
        return Err(RunFailure {
            error,
            last_stable: Box::new(PhaseState::new(profile.phi0.clone(), 0, profile.volume_target, params)),
        });
    }
    run_from(params, PhaseState::initial(profile, params), observers)
}

/// Integrates an arbitrary starting state to `t_final`. Observers see step 0,
/// every `record_stride`-th step and the final state.
pub fn run_from<T: Real>(
    params: &SolverParams<T>,
    initial: PhaseState<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> std::result::Result<PhaseState<T>, RunFailure<T>> {
    let stepper = match Stepper::new(params.clone()) {
        Ok(s) => s,
        Err(error) => {
            return Err(RunFailure {
                error,
                last_stable: Box::new(initial),
            })
        }
    };
    let n_steps = params.n_steps();
    let mut state = initial;
    for obs in observers.iter_mut() {
        obs.observe(&state, params);
    }
    for k in 1..=n_steps {
        match stepper.step(&state) {
            Ok(next) => state = next,
            Err(error) => {
                return Err(RunFailure {
                    error,
                    last_stable: Box::new(state),
                })
            }
        }
        if k % params.record_stride as u64 == 0 || k == n_steps {
            for obs in observers.iter_mut() {
                obs.observe(&state, params);
            }
        }
    }
    Ok(state)
}
