//! Well-prepared initial phase fields built from analytic regions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::density::density_ratio_sup_of;
use crate::diagnostics::energy::energy_density_of;
use crate::error::{Error, Result};
use crate::grid_fields::{grad_sq, ScalarField, TorusGrid};
use crate::scalar::{min_image, periodic_distance, wrap_unit, Real};
use crate::solver::potential::{k_of, potential_w};

/// Smallest admissible `epsilon / h`.
pub const MIN_CELLS_PER_EPSILON: f64 = 2.5;

/// `phi0` is kept inside `[-1 + CLIP, 1 - CLIP]`.
pub const CLIP: f64 = 1e-15;

/// Analytic initial region `U_0` on the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Region<T> {
    Ball { center: Vec<T>, radius: T },
    TwoBalls { centers: [Vec<T>; 2], radii: [T; 2] },
    /// Two-dimensional ellipse, axis aligned.
    Ellipse { center: Vec<T>, semi_axes: [T; 2] },
    /// Slab `|x_1 - center| < half_width`, bounded by two flat interfaces
    /// normal to the first axis.
    Stripe { center: T, half_width: T },
}

impl<T: Real> Region<T> {
    /// Signed distance to `∂U_0`: positive inside, negative outside.
    pub fn signed_distance(&self, x: &[T]) -> T {
        match self {
            Region::Ball { center, radius } => *radius - periodic_distance(x, center),
            Region::TwoBalls { centers, radii } => {
                let a = radii[0] - periodic_distance(x, &centers[0]);
                let b = radii[1] - periodic_distance(x, &centers[1]);
                a.max(b)
            }
            Region::Ellipse { center, semi_axes } => {
                let y0 = min_image(x[0] - center[0]);
                let y1 = min_image(x[1] - center[1]);
                ellipse_signed_distance(semi_axes[0], semi_axes[1], y0, y1)
            }
            Region::Stripe { center, half_width } => *half_width - min_image(x[0] - *center).abs(),
        }
    }

    /// `|U_0|`.
    pub fn volume(&self, d: usize) -> T {
        let ball = |r: T| {
            if d == 2 {
                T::PI() * r * r
            } else {
                T::of(4.0 / 3.0) * T::PI() * r * r * r
            }
        };
        match self {
            Region::Ball { radius, .. } => ball(*radius),
            Region::TwoBalls { radii, .. } => ball(radii[0]) + ball(radii[1]),
            Region::Ellipse { semi_axes, .. } => T::PI() * semi_axes[0] * semi_axes[1],
            Region::Stripe { half_width, .. } => T::of(2.0) * *half_width,
        }
    }

    /// `H^{d-1}(∂U_0)`.
    pub fn perimeter(&self, d: usize) -> T {
        let sphere = |r: T| {
            if d == 2 {
                T::of(2.0) * T::PI() * r
            } else {
                T::of(4.0) * T::PI() * r * r
            }
        };
        match self {
            Region::Ball { radius, .. } => sphere(*radius),
            Region::TwoBalls { radii, .. } => sphere(radii[0]) + sphere(radii[1]),
            Region::Ellipse { semi_axes, .. } => {
                // Periodic integrand: the midpoint rule converges geometrically.
                let m = 4096;
                let (a, b) = (semi_axes[0], semi_axes[1]);
                let dtheta = T::of(2.0) * T::PI() / T::of_usize(m);
                (0..m)
                    .map(|i| {
                        let th = (T::of_usize(i) + T::of(0.5)) * dtheta;
                        (a * a * th.sin().powi(2) + b * b * th.cos().powi(2)).sqrt() * dtheta
                    })
                    .fold(T::zero(), |acc, v| acc + v)
            }
            Region::Stripe { .. } => T::of(2.0),
        }
    }

    /// Circle centres and radii when the region is a union of balls.
    pub fn balls(&self) -> Option<Vec<(Vec<T>, T)>> {
        match self {
            Region::Ball { center, radius } => Some(vec![(center.clone(), *radius)]),
            Region::TwoBalls { centers, radii } => Some(vec![
                (centers[0].clone(), radii[0]),
                (centers[1].clone(), radii[1]),
            ]),
            _ => None,
        }
    }

    /// Checks the shape invariants for dimension `d` at interface width `epsilon`.
    pub fn validate(&self, d: usize, epsilon: T) -> Result<()> {
        let half = T::of(0.5);
        let check_center = |c: &[T]| -> Result<()> {
            if c.len() != d || c.iter().any(|v| !v.is_finite()) {
                return Err(Error::pre(format!("region centre must have {d} finite coordinates")));
            }
            Ok(())
        };
        match self {
            Region::Ball { center, radius } => {
                check_center(center)?;
                if !(*radius > T::zero() && *radius < half) {
                    return Err(Error::pre("ball radius must lie in (0, 1/2)"));
                }
            }
            Region::TwoBalls { centers, radii } => {
                check_center(&centers[0])?;
                check_center(&centers[1])?;
                if radii.iter().any(|r| !(*r > T::zero())) {
                    return Err(Error::pre("two_balls radii must be positive"));
                }
                let sep = periodic_distance(&centers[0], &centers[1]);
                if sep - radii[0] - radii[1] < T::of(4.0) * epsilon {
                    return Err(Error::pre("two_balls separation >= 4 epsilon"));
                }
                if (sep + radii[0] + radii[1]) * half >= half {
                    return Err(Error::pre("two_balls must fit in a ball of radius < 1/2"));
                }
            }
            Region::Ellipse { center, semi_axes } => {
                if d != 2 {
                    return Err(Error::pre("ellipse regions require d = 2"));
                }
                check_center(center)?;
                if semi_axes.iter().any(|a| !(*a > T::zero() && *a < half)) {
                    return Err(Error::pre("ellipse semi-axes must lie in (0, 1/2)"));
                }
            }
            Region::Stripe { center, half_width } => {
                if !center.is_finite() {
                    return Err(Error::pre("stripe centre must be finite"));
                }
                let w = *half_width;
                let four_eps = T::of(4.0) * epsilon;
                if !(w > T::zero() && w < half) || T::of(2.0) * w < four_eps || T::one() - T::of(2.0) * w < four_eps {
                    return Err(Error::pre("stripe phases must both be at least 4 epsilon thick"));
                }
            }
        }
        self.check_lipschitz(d)
    }

    /// Samples nearby point pairs and checks `|sd(x) - sd(y)| <= |x - y|`.
    pub fn check_lipschitz(&self, d: usize) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5d_1f);
        for _ in 0..512 {
            let x: Vec<T> = (0..d).map(|_| T::of(rng.gen_range(0.0..1.0))).collect();
            let y: Vec<T> = x
                .iter()
                .map(|&v| wrap_unit(v + T::of(rng.gen_range(-0.05..0.05))))
                .collect();
            let lhs = (self.signed_distance(&x) - self.signed_distance(&y)).abs();
            let rhs = periodic_distance(&x, &y);
            if lhs > rhs * T::of(1.0 + 1e-9) + T::of(1e-12) {
                return Err(Error::pre("signed distance is not 1-Lipschitz"));
            }
        }
        Ok(())
    }
}

/// Signed distance to the ellipse `(y0/a)^2 + (y1/b)^2 = 1`, positive inside.
///
/// Closest-point projection via the monotone root of
/// `(a y0 / (t + a^2))^2 + (b y1 / (t + b^2))^2 = 1`, bracketed and bisected to
/// machine precision.
pub fn ellipse_signed_distance<T: Real>(a: T, b: T, y0: T, y1: T) -> T {
    let (e0, e1, z0, z1) = if a >= b {
        (a, b, y0.abs(), y1.abs())
    } else {
        (b, a, y1.abs(), y0.abs())
    };
    let inside = (z0 / e0).powi(2) + (z1 / e1).powi(2) < T::one();
    let dist = ellipse_distance_first_quadrant(e0, e1, z0, z1);
    if inside {
        dist
    } else {
        -dist
    }
}

fn ellipse_distance_first_quadrant<T: Real>(e0: T, e1: T, y0: T, y1: T) -> T {
    let zero = T::zero();
    if y1 > zero {
        if y0 > zero {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - T::one();
            if g == zero {
                return zero;
            }
            let r0 = (e0 / e1).powi(2);
            let s = ellipse_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + T::one());
            ((x0 - y0).powi(2) + (x1 - y1).powi(2)).sqrt()
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xde0 = numer / denom;
            let x0 = e0 * xde0;
            let x1 = e1 * (T::one() - xde0 * xde0).sqrt();
            ((x0 - y0).powi(2) + x1 * x1).sqrt()
        } else {
            (y0 - e0).abs()
        }
    }
}

fn ellipse_root<T: Real>(r0: T, z0: T, z1: T, g: T) -> T {
    let n0 = r0 * z0;
    let mut s0 = z1 - T::one();
    let mut s1 = if g < T::zero() {
        T::zero()
    } else {
        (n0 * n0 + z1 * z1).sqrt() - T::one()
    };
    let mut s = s0;
    for _ in 0..1100 {
        s = (s0 + s1) * T::of(0.5);
        if s == s0 || s == s1 {
            break;
        }
        let q0 = n0 / (s + r0);
        let q1 = z1 / (s + T::one());
        let gs = q0 * q0 + q1 * q1 - T::one();
        if gs > T::zero() {
            s0 = s;
        } else if gs < T::zero() {
            s1 = s;
        } else {
            break;
        }
    }
    s
}

/// `phi0`, its interface width and the conserved quantity `V0 = ∫ k(phi0)`.
#[derive(Clone, Debug)]
pub struct InitialProfile<T> {
    pub epsilon: T,
    pub phi0: ScalarField<T>,
    pub volume_target: T,
    pub region: Region<T>,
}

/// Rejects `epsilon` below [`MIN_CELLS_PER_EPSILON`] cells.
pub fn check_resolution<T: Real>(epsilon: T, grid: TorusGrid) -> Result<()> {
    let h = grid.spacing::<T>();
    if !(epsilon >= T::of(MIN_CELLS_PER_EPSILON) * h) {
        return Err(Error::pre(format!(
            "epsilon >= {MIN_CELLS_PER_EPSILON}h (epsilon = {epsilon}, h = {h})"
        )));
    }
    Ok(())
}

/// `phi0 = tanh(sd / epsilon)`, clipped away from `±1`.
pub fn build_phi0<T: Real>(region: &Region<T>, epsilon: T, grid: TorusGrid) -> Result<InitialProfile<T>> {
    check_resolution(epsilon, grid)?;
    region.validate(grid.dim(), epsilon)?;
    let bound = T::one() - T::of(CLIP);
    let phi0 = ScalarField::from_fn(grid, |x| {
        let q = (region.signed_distance(x) / epsilon).tanh();
        q.max(-bound).min(bound)
    });
    let volume_target = phi0.map(k_of).integrate();
    Ok(InitialProfile {
        epsilon,
        phi0,
        volume_target,
        region: region.clone(),
    })
}

impl<T: Real> InitialProfile<T> {
    /// Slack allowed in the discrete equipartition inequality: `10 h^2 / epsilon^3`.
    pub fn tol_prep(&self) -> T {
        let h = self.phi0.grid().spacing::<T>();
        T::of(10.0) * h * h / self.epsilon.powi(3)
    }

    /// `max_x (epsilon |∇phi0|^2 / 2 - W(phi0) / epsilon)`.
    pub fn well_prepared_excess(&self) -> T {
        let eps = self.epsilon;
        let g2 = grad_sq(&self.phi0);
        g2.values()
            .iter()
            .zip(self.phi0.values())
            .fold(T::neg_infinity(), |m, (&g, &p)| {
                m.max(eps * g * T::of(0.5) - potential_w(p) / eps)
            })
    }

    pub fn is_well_prepared(&self) -> bool {
        self.well_prepared_excess() <= self.tol_prep()
    }

    /// `psi0 = (phi0 + 1) / 2`.
    pub fn psi0(&self) -> ScalarField<T> {
        self.phi0.map(|p| (p + T::one()) * T::of(0.5))
    }

    /// `sup mu0(B_r(x)) / (omega_{d-1} r^{d-1})` over the given radii and centres.
    pub fn density_ratio_sup(&self, radii: &[T], samples: &[Vec<T>]) -> Result<T> {
        let density = energy_density_of(&self.phi0, self.epsilon);
        density_ratio_sup_of(&density, radii, samples)
    }
}
