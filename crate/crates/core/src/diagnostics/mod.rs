//! Energies, diffuse measures and level-set geometry of a [`PhaseState`].

pub mod density;
pub mod energy;
pub mod interface;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::scalar::Real;
use crate::solver::{sigma, volume_k, PhaseState, SolverParams};

pub use density::{density_ratio, density_ratio_sup, unit_ball_scale, DEFAULT_RADII};
pub use energy::{
    approx_curvature, approx_velocity, discrepancy, energy_density_of, interface_density, mu_measure, penalty_energy,
    surface_energy,
};
pub use interface::{extract_interface, Interface, Loop};

/// Column order of [`DiagnosticsRecord::csv_row`].
pub const CSV_HEADER: &str = "t,E_S,E_P,E_total,lambda,vol_k,vol_psi,xi_total,mu_total,density_ratio_sup";

/// Where density ratios are probed: interface-adherent points, a fixed set of
/// pseudo-random points, and a list of radii.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleDesign<T> {
    pub radii: Vec<T>,
    pub interface_points: usize,
    pub random_points: Vec<Vec<T>>,
}

impl<T: Real> SampleDesign<T> {
    pub fn new(d: usize, interface_points: usize, random_points: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random_points = (0..random_points)
            .map(|_| (0..d).map(|_| T::of(rng.gen_range(0.0..1.0))).collect())
            .collect();
        Self {
            radii: DEFAULT_RADII.iter().map(|&r| T::of(r)).collect(),
            interface_points,
            random_points,
        }
    }

    /// 16 interface points, 16 random points, radii {0.05, 0.1, 0.2, 0.4}.
    pub fn standard(d: usize) -> Self {
        Self::new(d, 16, 16, 0x00de_5175)
    }

    /// Sample centres for `state`: evenly spaced interface points plus the random set.
    pub fn samples(&self, state: &PhaseState<T>) -> Vec<Vec<T>> {
        let mut out = Vec::new();
        if self.interface_points > 0 {
            let pts = extract_interface(&state.phi).points();
            if !pts.is_empty() {
                let stride = pts.len().div_ceil(self.interface_points).max(1);
                out.extend(pts.into_iter().step_by(stride));
            }
        }
        out.extend(self.random_points.iter().cloned());
        out
    }
}

/// Per-record scalar diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord<T> {
    pub t: T,
    pub e_s: T,
    pub e_p: T,
    pub e_total: T,
    pub lambda: T,
    pub vol_k: T,
    pub vol_psi: T,
    pub xi_total: T,
    pub mu_total: T,
    pub density_ratio_sup: T,
}

impl<T: Real> DiagnosticsRecord<T> {
    pub fn compute(state: &PhaseState<T>, params: &SolverParams<T>, design: &SampleDesign<T>) -> Result<Self> {
        let density = energy_density_of(&state.phi, params.epsilon);
        let e_s = density.integrate();
        let vol_k = volume_k(&state.phi);
        let dev = state.volume_target - vol_k;
        let e_p = dev * dev / (T::of(2.0) * params.eps_alpha());
        let (_, xi_total) = discrepancy(state, params);
        let samples = design.samples(state);
        let density_ratio_sup = density::density_ratio_sup_of(&density, &design.radii, &samples)?;
        Ok(Self {
            t: state.t,
            e_s,
            e_p,
            e_total: e_s + e_p,
            lambda: state.lambda,
            vol_k,
            vol_psi: state.phi.map(|p| (p + T::one()) * T::of(0.5)).integrate(),
            xi_total,
            mu_total: e_s / sigma::<T>(),
            density_ratio_sup,
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.e_s,
            self.e_p,
            self.e_total,
            self.lambda,
            self.vol_k,
            self.vol_psi,
            self.xi_total,
            self.mu_total,
            self.density_ratio_sup
        )
    }

    /// Looks a column up by its CSV name.
    pub fn column(&self, name: &str) -> Option<T> {
        Some(match name {
            "t" => self.t,
            "E_S" => self.e_s,
            "E_P" => self.e_p,
            "E_total" => self.e_total,
            "lambda" => self.lambda,
            "vol_k" => self.vol_k,
            "vol_psi" => self.vol_psi,
            "xi_total" => self.xi_total,
            "mu_total" => self.mu_total,
            "density_ratio_sup" => self.density_ratio_sup,
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests;
