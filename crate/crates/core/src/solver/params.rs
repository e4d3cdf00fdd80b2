use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_fields::TorusGrid;
use crate::initial_data::check_resolution;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Forward Euler on the full right-hand side.
    #[default]
    Explicit,
    /// Reaction and multiplier explicit, diffusion solved exactly in Fourier space.
    Imex,
}

/// Fraction of the stability bound used when `dt` is not given.
pub const AUTO_DT_FRACTION: f64 = 0.9;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverParams<T> {
    pub epsilon: T,
    pub alpha: T,
    pub dt: T,
    pub t_final: T,
    pub scheme: Scheme,
    pub grid: TorusGrid,
    /// Observers fire every `record_stride` steps.
    pub record_stride: usize,
    /// Skip the step-size bound (resolution and positivity checks still apply).
    pub force: bool,
}

/// Stability bound on `dt`.
///
/// Explicit: `min(h^2 / 2d, epsilon^2 / 8)`; IMEX: `epsilon^2 / 8`. The
/// reaction bound comes from `sup |W''| = 4` on `[-1, 1]`.
pub fn cfl_bound<T: Real>(scheme: Scheme, grid: TorusGrid, epsilon: T) -> T {
    let reaction = epsilon * epsilon / T::of(8.0);
    match scheme {
        Scheme::Explicit => {
            let h = grid.spacing::<T>();
            (h * h / T::of_usize(2 * grid.dim())).min(reaction)
        }
        Scheme::Imex => reaction,
    }
}

impl<T: Real> SolverParams<T> {
    /// Parameters with `dt` set to [`AUTO_DT_FRACTION`] of the stability bound.
    pub fn with_auto_dt(grid: TorusGrid, epsilon: T, alpha: T, t_final: T, scheme: Scheme) -> Result<Self> {
        let params = Self {
            epsilon,
            alpha,
            dt: T::of(AUTO_DT_FRACTION) * cfl_bound(scheme, grid, epsilon),
            t_final,
            scheme,
            grid,
            record_stride: 1,
            force: false,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::pre("epsilon > 0"));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(Error::pre(format!("alpha in (0, 1), got {}", self.alpha)));
        }
        if !(self.dt > T::zero()) {
            return Err(Error::pre("dt > 0"));
        }
        if !(self.t_final >= T::zero()) {
            return Err(Error::pre("t_final >= 0"));
        }
        if self.record_stride == 0 {
            return Err(Error::pre("record_stride >= 1"));
        }
        check_resolution(self.epsilon, self.grid)?;
        let bound = self.cfl_bound();
        if !self.force && self.dt > bound {
            let rule = match self.scheme {
                Scheme::Explicit => "dt <= min(h^2/(2d), epsilon^2/8)",
                Scheme::Imex => "dt <= epsilon^2/8",
            };
            return Err(Error::pre(format!("{rule} (dt = {}, bound = {bound})", self.dt)));
        }
        Ok(())
    }

    pub fn cfl_bound(&self) -> T {
        cfl_bound(self.scheme, self.grid, self.epsilon)
    }

    /// Number of steps needed to reach `t_final`.
    pub fn n_steps(&self) -> u64 {
        let ratio = (self.t_final / self.dt).as_f64();
        (ratio - 1e-9).ceil().max(0.0) as u64
    }

    /// `epsilon^alpha`.
    pub fn eps_alpha(&self) -> T {
        self.epsilon.powf(self.alpha)
    }
}
