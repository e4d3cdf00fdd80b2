use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::field::ScalarField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Solves `(a I - b lap) u = f` in the discrete Fourier basis of the grid.
///
/// The symbol of the compact Laplacian is
/// `-sum_i (2 - 2 cos(2 pi k_i h)) / h^2`, so the solve is diagonal and exact
/// up to rounding. Plans are built once and reused across solves.
pub struct HelmholtzSolver<T: Real> {
    grid: TorusGrid,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// `(2 - 2 cos(2 pi k / n)) / h^2` for `k = 0..n`.
    axis_symbol: Vec<T>,
}

impl<T: Real> HelmholtzSolver<T> {
    pub fn new(grid: TorusGrid) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::<T>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let inv_h2 = T::of_usize(n * n);
        let axis_symbol = (0..n)
            .map(|k| {
                let theta = T::of(2.0) * T::PI() * T::of_usize(k) / T::of_usize(n);
                (T::of(2.0) - T::of(2.0) * theta.cos()) * inv_h2
            })
            .collect();
        Self {
            grid,
            forward,
            inverse,
            axis_symbol,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// `mu(k) >= 0` such that `lap e_k = -mu(k) e_k`.
    pub fn symbol(&self, idx: usize) -> T {
        (0..self.grid.dim())
            .map(|axis| self.axis_symbol[self.grid.coord(idx, axis)])
            .fold(T::zero(), |acc, v| acc + v)
    }

    pub fn solve(&self, f: &ScalarField<T>, a: T, b: T) -> Result<ScalarField<T>> {
        if !(a > T::zero()) {
            return Err(Error::pre(format!("helmholtz_solve requires a > 0, got {a}")));
        }
        if b < T::zero() {
            return Err(Error::pre(format!("helmholtz_solve requires b >= 0, got {b}")));
        }
        if f.grid() != self.grid {
            return Err(Error::GridMismatch("helmholtz solver built for another grid".into()));
        }
        let mut buf: Vec<Complex<T>> = f.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.transform(&mut buf, &self.forward);
        for (idx, c) in buf.iter_mut().enumerate() {
            *c = *c / (a + b * self.symbol(idx));
        }
        self.transform(&mut buf, &self.inverse);
        let scale = T::one() / T::of_usize(self.grid.len());
        let values = buf.into_iter().map(|c| c.re * scale).collect();
        ScalarField::new(self.grid, values)
    }

    fn transform(&self, buf: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        let len = self.grid.len();
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex::new(T::zero(), T::zero()); n];
        for axis in 0..self.grid.dim() {
            let stride = self.grid.stride(axis);
            if stride == 1 {
                plan.process_with_scratch(buf, &mut scratch);
                continue;
            }
            let block = n * stride;
            for outer in (0..len).step_by(block) {
                for inner in 0..stride {
                    let start = outer + inner;
                    for (k, slot) in line.iter_mut().enumerate() {
                        *slot = buf[start + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        buf[start + k * stride] = *v;
                    }
                }
            }
        }
    }
}

/// One-shot `(a I - b lap) u = f`.
pub fn helmholtz_solve<T: Real>(f: &ScalarField<T>, a: T, b: T) -> Result<ScalarField<T>> {
    HelmholtzSolver::new(f.grid()).solve(f, a, b)
}
