//! Second-order periodic finite differences.
//!
//! The compact Laplacian, the forward/backward differences and the averaged
//! squared gradient are tied together by summation by parts:
//! `sum f * lap(g) = -sum_i sum (D_i^+ f)(D_i^+ g)`, and
//! `grad_sq(f) = 1/2 sum_i ((D_i^+ f)^2 + (D_i^- f)^2)` is the energy density
//! whose variation is `-lap`. The centred gradient is provided separately for
//! direction fields.

use rayon::prelude::*;

use super::field::{ScalarField, VectorField, CHUNK};
use crate::error::{Error, Result};
use crate::scalar::{min_image, Real};

/// Evaluates `op(lap f(x), f(x))` at every cell, with the `2d+1`-point
/// Laplacian computed line by line along the last (contiguous) axis.
pub fn laplacian_map<T, F>(f: &ScalarField<T>, op: F) -> ScalarField<T>
where
    T: Real,
    F: Fn(T, T) -> T + Sync,
{
    let g = f.grid();
    let n = g.n();
    let d = g.dim();
    let inv_h2 = T::of_usize(n * n);
    let v = f.values();
    let mut out = vec![T::zero(); g.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(line, dst)| {
        let start = line * n;
        let src = &v[start..start + n];
        // Neighbouring lines along the first d - 1 axes.
        let mut nbrs: [&[T]; 4] = [src; 4];
        for axis in 0..d - 1 {
            for (k, forward) in [true, false].into_iter().enumerate() {
                let s = g.neighbor(start, axis, forward);
                nbrs[2 * axis + k] = &v[s..s + n];
            }
        }
        let nbrs = &nbrs[..2 * (d - 1)];
        for j in 0..n {
            let jm = if j == 0 { n - 1 } else { j - 1 };
            let jp = if j + 1 == n { 0 } else { j + 1 };
            let c = src[j];
            let mut acc = (src[jm] - c) + (src[jp] - c);
            for nb in nbrs {
                acc = acc + (nb[j] - c);
            }
            dst[j] = op(acc * inv_h2, src[j]);
        }
    });
    ScalarField::from_vec_unchecked(g, out)
}

/// `2d+1`-point Laplacian with periodic wrap.
pub fn laplacian<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    laplacian_map(f, |lap, _| lap)
}

/// Centred gradient `(f(x + h e_i) - f(x - h e_i)) / 2h`.
pub fn gradient<T: Real>(f: &ScalarField<T>) -> VectorField<T> {
    let g = f.grid();
    let inv_2h = T::one() / (T::of(2.0) * g.spacing::<T>());
    let v = f.values();
    let components = (0..g.dim())
        .map(|axis| {
            (0..g.len())
                .into_par_iter()
                .with_min_len(CHUNK)
                .map(|i| (v[g.neighbor(i, axis, true)] - v[g.neighbor(i, axis, false)]) * inv_2h)
                .collect()
        })
        .collect();
    VectorField::new(g, components).expect("gradient has d components of length n^d")
}

/// `D_axis^+ f (x) = (f(x + h e_axis) - f(x)) / h`.
pub fn forward_difference<T: Real>(f: &ScalarField<T>, axis: usize) -> ScalarField<T> {
    difference(f, axis, true)
}

/// `D_axis^- f (x) = (f(x) - f(x - h e_axis)) / h`.
pub fn backward_difference<T: Real>(f: &ScalarField<T>, axis: usize) -> ScalarField<T> {
    difference(f, axis, false)
}

fn difference<T: Real>(f: &ScalarField<T>, axis: usize, forward: bool) -> ScalarField<T> {
    let g = f.grid();
    assert!(axis < g.dim(), "axis {axis} out of range for d = {}", g.dim());
    let inv_h = T::of_usize(g.n());
    let v = f.values();
    let out = (0..g.len())
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|i| {
            if forward {
                (v[g.neighbor(i, axis, true)] - v[i]) * inv_h
            } else {
                (v[i] - v[g.neighbor(i, axis, false)]) * inv_h
            }
        })
        .collect();
    ScalarField::from_vec_unchecked(g, out)
}

/// Pointwise `1/2 sum_i (D_i^+ a D_i^+ b + D_i^- a D_i^- b)`.
///
/// With `a = b` this is the squared gradient used by every energy density.
pub fn gradient_pairing<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<ScalarField<T>> {
    a.same_grid(b)?;
    let g = a.grid();
    let d = g.dim();
    let inv_h = T::of_usize(g.n());
    let half_inv_h2 = T::of(0.5) * inv_h * inv_h;
    let (av, bv) = (a.values(), b.values());
    let out = (0..g.len())
        .into_par_iter()
        .with_min_len(CHUNK)
        .map(|i| {
            let mut acc = T::zero();
            for axis in 0..d {
                let f = g.neighbor(i, axis, true);
                let k = g.neighbor(i, axis, false);
                acc = acc + (av[f] - av[i]) * (bv[f] - bv[i]) + (av[i] - av[k]) * (bv[i] - bv[k]);
            }
            acc * half_inv_h2
        })
        .collect();
    Ok(ScalarField::from_vec_unchecked(g, out))
}

/// Pointwise `1/2 sum_i ((D_i^+ f)^2 + (D_i^- f)^2)`.
pub fn grad_sq<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    gradient_pairing(f, f).expect("same field")
}

/// `sum_i h^d sum_x (D_i^+ f)(D_i^+ g)`, the discrete Dirichlet form.
pub fn dirichlet_form<T: Real>(f: &ScalarField<T>, g: &ScalarField<T>) -> Result<T> {
    f.same_grid(g)?;
    let mut total = T::zero();
    for axis in 0..f.grid().dim() {
        total = total + forward_difference(f, axis).integrate_product(&forward_difference(g, axis))?;
    }
    Ok(total)
}

/// `h^d` times the sum of `f` over cells whose centres lie within periodic
/// distance `r` of `x0`. Requires `0 < r < 1/2`.
pub fn ball_indicator_sum<T: Real>(f: &ScalarField<T>, x0: &[T], r: T) -> Result<T> {
    if !(r > T::zero() && r < T::of(0.5)) {
        return Err(Error::pre(format!("ball radius must satisfy 0 < r < 1/2, got {r}")));
    }
    let g = f.grid();
    let d = g.dim();
    if x0.len() < d {
        return Err(Error::pre(format!("ball centre needs {d} coordinates")));
    }
    let n = g.n();
    let h = g.spacing::<T>();
    let half = T::of(0.5);
    // Cell k has centre (k + 1/2) h; enumerate offsets from the cell nearest x0.
    let mut base = [0isize; 3];
    let mut frac = [T::zero(); 3];
    for axis in 0..d {
        let u = x0[axis] / h - half;
        let k = u.round();
        base[axis] = k.to_isize().unwrap_or(0);
        frac[axis] = (u - k) * h;
    }
    let reach = (r / h).ceil().to_isize().unwrap_or(0) + 1;
    let reach = reach.min((n as isize - 1) / 2);
    let r2 = r * r;
    let v = f.values();
    let mut sum = T::zero();
    let offsets = -reach..=reach;
    let mut visit = |off: [isize; 3]| {
        let mut dist2 = T::zero();
        let mut coords = [0isize; 3];
        for axis in 0..d {
            let dx = min_image(T::from_isize(off[axis]).unwrap() * h - frac[axis]);
            dist2 = dist2 + dx * dx;
            coords[axis] = base[axis] + off[axis];
        }
        if dist2 <= r2 {
            sum = sum + v[g.index(&coords[..d])];
        }
    };
    for a in offsets.clone() {
        for b in offsets.clone() {
            if d == 2 {
                visit([a, b, 0]);
            } else {
                for c in offsets.clone() {
                    visit([a, b, c]);
                }
            }
        }
    }
    Ok(sum * g.cell_volume::<T>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_fields::TorusGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_field(g: TorusGrid, seed: u64) -> ScalarField<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::new(g, v).unwrap()
    }

    /// Dense stencil matrix assembled entry by entry from the definition.
    fn dense_laplacian(g: TorusGrid) -> Vec<Vec<f64>> {
        let n = g.n() as isize;
        let h2 = (1.0 / n as f64).powi(2);
        let mut m = vec![vec![0.0; g.len()]; g.len()];
        for i in 0..n {
            for j in 0..n {
                let row = g.index(&[i, j]);
                m[row][row] -= 4.0 / h2;
                for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    m[row][g.index(&[i + di, j + dj])] += 1.0 / h2;
                }
            }
        }
        m
    }

    #[test]
    fn laplacian_map_matches_neighbour_formula_in_3d() {
        let g = TorusGrid::new(3, 8).unwrap();
        let f = random_field(g, 21);
        let lap = laplacian(&f);
        let v = f.values();
        for i in 0..g.len() {
            let mut acc = -6.0 * v[i];
            for axis in 0..3 {
                acc += v[g.neighbor(i, axis, true)] + v[g.neighbor(i, axis, false)];
            }
            assert!((acc * 64.0 - lap.values()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_matches_dense_matrix() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = random_field(g, 1);
        let m = dense_laplacian(g);
        let lap = laplacian(&f);
        for (row, out) in m.iter().zip(lap.values()) {
            let expect: f64 = row.iter().zip(f.values()).map(|(a, b)| a * b).sum();
            assert!((expect - out).abs() < 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_dense_difference_matrix() {
        let g = TorusGrid::new(2, 16).unwrap();
        let n = 16isize;
        let f = random_field(g, 2);
        let grad = gradient(&f);
        for axis in 0..2 {
            for i in 0..n {
                for j in 0..n {
                    let row = g.index(&[i, j]);
                    let mut dense = vec![0.0; g.len()];
                    let (p, m) = if axis == 0 {
                        (g.index(&[i + 1, j]), g.index(&[i - 1, j]))
                    } else {
                        (g.index(&[i, j + 1]), g.index(&[i, j - 1]))
                    };
                    dense[p] += n as f64 / 2.0;
                    dense[m] -= n as f64 / 2.0;
                    let expect: f64 = dense.iter().zip(f.values()).map(|(a, b)| a * b).sum();
                    assert!((expect - grad.component(axis)[row]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn constants_are_harmonic_and_flat() {
        let g = TorusGrid::new(3, 8).unwrap();
        let f = ScalarField::<f64>::constant(g, 3.7);
        assert_eq!(laplacian(&f).max_abs(), 0.0);
        assert_eq!(gradient(&f).max_abs(), 0.0);
    }

    #[test]
    fn cosine_is_a_stencil_eigenfunction() {
        let n = 64;
        let g = TorusGrid::new(2, n).unwrap();
        let h = 1.0 / n as f64;
        let f = ScalarField::<f64>::from_fn(g, |x| (2.0 * PI * x[0]).cos());
        let factor = -(2.0 - 2.0 * (2.0 * PI / n as f64).cos()) / (h * h);
        let lap = laplacian(&f);
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((a - factor * b).abs() < 1e-9);
        }
    }

    #[test]
    fn sine_gradient_is_the_centred_quotient() {
        let n = 32;
        let g = TorusGrid::new(2, n).unwrap();
        let h = 1.0 / n as f64;
        let f = ScalarField::<f64>::from_fn(g, |x| (2.0 * PI * x[1]).sin());
        let grad = gradient(&f);
        for idx in 0..g.len() {
            let x: [f64; 3] = g.cell_center(idx);
            let expect = ((2.0 * PI * (x[1] + h)).sin() - (2.0 * PI * (x[1] - h)).sin()) / (2.0 * h);
            assert!((grad.component(1)[idx] - expect).abs() < 1e-12);
            assert!(grad.component(0)[idx].abs() < 1e-12);
        }
    }

    #[test]
    fn summation_by_parts_and_zero_mean_laplacian() {
        for (d, n, seed) in [(2, 16, 3), (3, 8, 4)] {
            let g = TorusGrid::new(d, n).unwrap();
            let f = random_field(g, seed);
            let u = random_field(g, seed + 100);
            let lhs = f.integrate_product(&laplacian(&u)).unwrap();
            let rhs = -dirichlet_form(&f, &u).unwrap();
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
            assert!(laplacian(&f).integrate().abs() < 1e-10);
        }
    }

    #[test]
    fn grad_sq_integrates_to_dirichlet_energy() {
        let g = TorusGrid::new(2, 16).unwrap();
        let f = random_field(g, 9);
        let a = grad_sq(&f).integrate();
        let b = dirichlet_form(&f, &f).unwrap();
        assert!((a - b).abs() < 1e-10 * b);
    }

    #[test]
    fn ball_sum_counts_disk_area() {
        let g = TorusGrid::new(2, 256).unwrap();
        let one = ScalarField::<f64>::constant(g, 1.0);
        let r = 0.25;
        let a = ball_indicator_sum(&one, &[0.3, 0.95], r).unwrap();
        let h = 1.0 / 256.0;
        assert!((a - PI * r * r).abs() < 2.0 * PI * r * h);
        assert_eq!(ball_indicator_sum(&ScalarField::zeros(g), &[0.5, 0.5], r).unwrap(), 0.0);
        assert!(ball_indicator_sum(&one, &[0.5, 0.5], 0.5).is_err());
    }

    #[test]
    fn ball_sum_matches_brute_force_periodic_scan() {
        let g = TorusGrid::new(2, 32).unwrap();
        let f = random_field(g, 11);
        for (x0, r) in [([0.01, 0.99], 0.3), ([0.5, 0.2], 0.07), ([0.77, 0.03], 0.45)] {
            let fast = ball_indicator_sum(&f, &x0, r).unwrap();
            let mut slow = 0.0;
            for idx in 0..g.len() {
                let x: [f64; 3] = g.cell_center(idx);
                if crate::scalar::periodic_distance(&x[..2], &x0) <= r {
                    slow += f.values()[idx];
                }
            }
            slow /= (32 * 32) as f64;
            assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        }
    }
}
