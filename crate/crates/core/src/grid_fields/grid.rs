use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform cell-centred grid on the flat torus `(R/Z)^d`.
///
/// Cell `k` along an axis has centre `(k + 1/2) h` with `h = 1/n`. Values are
/// stored row-major: axis 0 varies slowest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    d: usize,
    n: usize,
}

impl TorusGrid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(d == 2 || d == 3) {
            return Err(Error::pre(format!("dimension d must be 2 or 3, got {d}")));
        }
        if n < Self::MIN_CELLS {
            return Err(Error::pre(format!("n >= 8 cells per axis, got {n}")));
        }
        Ok(Self { d, n })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cells, `n^d`.
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing<T: Real>(&self) -> T {
        T::one() / T::of_usize(self.n)
    }

    /// Volume of one cell, `h^d`.
    #[inline]
    pub fn cell_volume<T: Real>(&self) -> T {
        self.spacing::<T>().powi(self.d as i32)
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.d - 1 - axis) as u32)
    }

    #[inline]
    pub fn coord(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.n
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for (axis, slot) in c.iter_mut().enumerate().take(self.d) {
            *slot = self.coord(idx, axis);
        }
        c
    }

    /// Flat index of a multi-index; every coordinate is wrapped modulo `n`.
    pub fn index(&self, coords: &[isize]) -> usize {
        let n = self.n as isize;
        coords
            .iter()
            .take(self.d)
            .fold(0usize, |acc, &c| acc * self.n + c.rem_euclid(n) as usize)
    }

    /// Neighbour of `idx` one cell forward (`+h e_axis`) or backward, with periodic wrap.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, forward: bool) -> usize {
        let s = self.stride(axis);
        let c = (idx / s) % self.n;
        if forward {
            if c + 1 == self.n {
                idx + s - self.n * s
            } else {
                idx + s
            }
        } else if c == 0 {
            idx + self.n * s - s
        } else {
            idx - s
        }
    }

    /// Centre of cell `idx`; only the first `d` entries are meaningful.
    pub fn cell_center<T: Real>(&self, idx: usize) -> [T; 3] {
        let h = self.spacing::<T>();
        let half = T::of(0.5);
        let mut x = [T::zero(); 3];
        for (axis, slot) in x.iter_mut().enumerate().take(self.d) {
            *slot = (T::of_usize(self.coord(idx, axis)) + half) * h;
        }
        x
    }
}
