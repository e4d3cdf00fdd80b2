use rayon::prelude::*;

use super::grid::TorusGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cells per rayon task. Reductions are summed per chunk and then folded in
/// chunk order, so results do not depend on the thread count.
pub(crate) const CHUNK: usize = 4096;

/// Scalar samples at the cell centres of a [`TorusGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: TorusGrid,
    values: Vec<T>,
}

/// `d` scalar components on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    grid: TorusGrid,
    components: Vec<Vec<T>>,
}

/// Deterministic sum: fixed chunking, chunk sums folded in order.
pub(crate) fn ordered_sum<T: Real>(values: &[T]) -> T {
    let partial: Vec<T> = values
        .par_chunks(CHUNK)
        .map(|c| c.iter().fold(T::zero(), |acc, &v| acc + v))
        .collect();
    partial.into_iter().fold(T::zero(), |acc, v| acc + v)
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: TorusGrid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("ScalarField::new"));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: TorusGrid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn constant(grid: TorusGrid, c: T) -> Self {
        Self::from_vec_unchecked(grid, vec![c; grid.len()])
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, T::zero())
    }

    /// Samples `f` at every cell centre. `f` receives the first `d` coordinates.
    pub fn from_fn<F>(grid: TorusGrid, f: F) -> Self
    where
        F: Fn(&[T]) -> T + Sync,
    {
        let d = grid.dim();
        let values = (0..grid.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|idx| {
                let x = grid.cell_center::<T>(idx);
                f(&x[..d])
            })
            .collect();
        Self::from_vec_unchecked(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map<F>(&self, f: F) -> Self
    where
        F: Fn(T) -> T + Sync,
    {
        let values = self.values.par_iter().with_min_len(CHUNK).map(|&v| f(v)).collect();
        Self::from_vec_unchecked(self.grid, values)
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> T + Sync,
    {
        self.same_grid(other)?;
        let values = self
            .values
            .par_iter()
            .zip(other.values.par_iter())
            .with_min_len(CHUNK)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self::from_vec_unchecked(self.grid, values))
    }

    pub fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Midpoint rule: `h^d * sum(values)`.
    pub fn integrate(&self) -> T {
        self.grid.cell_volume::<T>() * ordered_sum(&self.values)
    }

    /// `integrate(f(self))` without allocating the mapped field.
    pub fn integrate_with<F>(&self, f: F) -> T
    where
        F: Fn(T) -> T + Sync,
    {
        let partial: Vec<T> = self
            .values
            .par_chunks(CHUNK)
            .map(|c| c.iter().fold(T::zero(), |acc, &v| acc + f(v)))
            .collect();
        self.grid.cell_volume::<T>() * partial.into_iter().fold(T::zero(), |acc, v| acc + v)
    }

    /// `integrate(self * other)` without allocating the product.
    pub fn integrate_product(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        let partial: Vec<T> = self
            .values
            .par_chunks(CHUNK)
            .zip(other.values.par_chunks(CHUNK))
            .map(|(a, b)| a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y))
            .collect();
        let s = partial.into_iter().fold(T::zero(), |acc, v| acc + v);
        Ok(self.grid.cell_volume::<T>() * s)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &v| m.min(v))
    }

    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// Cyclic translation by whole cells: `out(x) = self(x - shift * h)`.
    pub fn translate(&self, shift: &[isize]) -> Self {
        let g = self.grid;
        let d = g.dim();
        let mut out = vec![T::zero(); g.len()];
        for (idx, &v) in self.values.iter().enumerate() {
            let c = g.coords(idx);
            let mut t = [0isize; 3];
            for axis in 0..d {
                t[axis] = c[axis] as isize + shift.get(axis).copied().unwrap_or(0);
            }
            out[g.index(&t[..d])] = v;
        }
        Self::from_vec_unchecked(g, out)
    }
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: TorusGrid, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "expected {} components, got {}",
                grid.dim(),
                components.len()
            )));
        }
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::GridMismatch("component length differs from n^d".into()));
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            components: vec![vec![T::zero(); grid.len()]; grid.dim()],
        }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn component(&self, axis: usize) -> &[T] {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    /// Pointwise Euclidean norm.
    pub fn norm(&self) -> ScalarField<T> {
        let values = (0..self.grid.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|i| {
                self.components
                    .iter()
                    .fold(T::zero(), |acc, c| acc + c[i] * c[i])
                    .sqrt()
            })
            .collect();
        ScalarField::from_vec_unchecked(self.grid, values)
    }

    pub fn max_abs(&self) -> T {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(T::zero(), |m, v| m.max(v.abs()))
    }
}
