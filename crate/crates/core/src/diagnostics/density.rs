use crate::error::Result;
use crate::grid_fields::{ball_indicator_sum, ScalarField};
use crate::scalar::Real;
use crate::solver::{sigma, PhaseState, SolverParams};

use super::energy::energy_density_of;

/// Radii used by the default sample design.
pub const DEFAULT_RADII: [f64; 4] = [0.05, 0.1, 0.2, 0.4];

/// `omega_{d-1} r^{d-1}`: `2r` in 2-D, `pi r^2` in 3-D.
pub fn unit_ball_scale<T: Real>(d: usize, r: T) -> T {
    if d == 2 {
        T::of(2.0) * r
    } else {
        T::PI() * r * r
    }
}

/// Ratio for an already assembled energy density (not yet divided by sigma).
pub fn density_ratio_of<T: Real>(energy_density: &ScalarField<T>, x0: &[T], r: T) -> Result<T> {
    let mass = ball_indicator_sum(energy_density, x0, r)? / sigma::<T>();
    Ok(mass / unit_ball_scale(energy_density.grid().dim(), r))
}

pub fn density_ratio_sup_of<T: Real>(energy_density: &ScalarField<T>, radii: &[T], samples: &[Vec<T>]) -> Result<T> {
    let mut best = T::zero();
    for x0 in samples {
        for &r in radii {
            best = best.max(density_ratio_of(energy_density, x0, r)?);
        }
    }
    Ok(best)
}

/// `mu_t(B_r(x0)) / (omega_{d-1} r^{d-1})`.
pub fn density_ratio<T: Real>(state: &PhaseState<T>, params: &SolverParams<T>, x0: &[T], r: T) -> Result<T> {
    density_ratio_of(&energy_density_of(&state.phi, params.epsilon), x0, r)
}

pub fn density_ratio_sup<T: Real>(
    state: &PhaseState<T>,
    params: &SolverParams<T>,
    radii: &[T],
    samples: &[Vec<T>],
) -> Result<T> {
    density_ratio_sup_of(&energy_density_of(&state.phi, params.epsilon), radii, samples)
}
