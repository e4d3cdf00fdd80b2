//! Exact sharp-interface reference for disjoint circles in the plane and a
//! comparator against phase-field interface snapshots.

use serde::Serialize;

use crate::diagnostics::{Interface, Loop};
use crate::error::{Error, Result};
use crate::initial_data::Region;
use crate::scalar::{min_image, periodic_distance, Real};

/// Radius at which a circle is removed.
pub const R_MIN: f64 = 1e-4;
/// Step-size safety factor: `r > SAFETY * dt * |r'|`.
pub const SAFETY: f64 = 5.0;

/// `r_i' = N / sum r - 1 / r_i` over the live circles (`r > 0`); extinct
/// entries get rate 0.
pub fn circle_rhs<T: Real>(radii: &[T]) -> Vec<T> {
    let live = radii.iter().filter(|&&r| r > T::zero()).count();
    let total = radii.iter().filter(|&&r| r > T::zero()).fold(T::zero(), |a, &r| a + r);
    if live == 0 {
        return vec![T::zero(); radii.len()];
    }
    let mean_curv = T::of_usize(live) / total;
    radii
        .iter()
        .map(|&r| if r > T::zero() { mean_curv - T::one() / r } else { T::zero() })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleSystem<T> {
    pub radii: Vec<T>,
    pub centers: Vec<[T; 2]>,
}

impl<T: Real> CircleSystem<T> {
    pub fn new(radii: Vec<T>, centers: Vec<[T; 2]>) -> Result<Self> {
        if radii.is_empty() || radii.len() != centers.len() {
            return Err(Error::pre("one centre per radius, at least one circle"));
        }
        if radii.iter().any(|&r| !(r > T::zero())) {
            return Err(Error::pre("radii positive"));
        }
        for i in 0..radii.len() {
            for j in i + 1..radii.len() {
                if periodic_distance(&centers[i], &centers[j]) <= radii[i] + radii[j] {
                    return Err(Error::pre(format!("circles {i} and {j} disjoint")));
                }
            }
        }
        Ok(Self { radii, centers })
    }

    /// Circles of a ball or two-ball region in the plane.
    pub fn from_region(region: &Region<T>) -> Result<Self> {
        let balls = region.balls().ok_or_else(|| Error::pre("circle oracle needs a ball region"))?;
        if balls.iter().any(|(c, _)| c.len() != 2) {
            return Err(Error::pre("circle oracle is two-dimensional"));
        }
        let centers = balls.iter().map(|(c, _)| [c[0], c[1]]).collect();
        Self::new(balls.into_iter().map(|(_, r)| r).collect(), centers)
    }

    pub fn area(&self) -> T {
        area_of(&self.radii)
    }
}

fn area_of<T: Real>(radii: &[T]) -> T {
    radii.iter().fold(T::zero(), |a, &r| a + r * r) * T::PI()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extinction<T> {
    pub t: T,
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircleTrajectory<T> {
    pub times: Vec<T>,
    pub radii: Vec<Vec<T>>,
    pub extinctions: Vec<Extinction<T>>,
}

/// Rates of `s_i = r_i^2`: `2 (kbar r_i - 1)`. Their sum vanishes, so RK4
/// keeps the total area to round-off.
fn area_rhs<T: Real>(s: &[T]) -> Vec<T> {
    let r: Vec<T> = s.iter().map(|&v| if v > T::zero() { v.sqrt() } else { T::zero() }).collect();
    circle_rhs(&r)
        .iter()
        .zip(&r)
        .map(|(&v, &ri)| T::of(2.0) * ri * v)
        .collect()
}

fn axpy<T: Real>(s: &[T], k: &[T], c: T) -> Vec<T> {
    s.iter()
        .zip(k)
        .map(|(&a, &b)| if a > T::zero() { a + c * b } else { a })
        .collect()
}

fn rk4<T: Real>(s: &[T], dt: T) -> Vec<T> {
    let half = T::of(0.5) * dt;
    let k1 = area_rhs(s);
    let k2 = area_rhs(&axpy(s, &k1, half));
    let k3 = area_rhs(&axpy(s, &k2, half));
    let k4 = area_rhs(&axpy(s, &k3, dt));
    let sixth = dt / T::of(6.0);
    (0..s.len())
        .map(|i| {
            if s[i] > T::zero() {
                s[i] + sixth * (k1[i] + T::of(2.0) * (k2[i] + k3[i]) + k4[i])
            } else {
                s[i]
            }
        })
        .collect()
}

/// Largest step allowed at `r`, `inf` when nothing moves.
pub fn admissible<T: Real>(r: &[T]) -> T {
    let rates = circle_rhs(r);
    r.iter()
        .zip(&rates)
        .filter(|(&ri, &v)| ri > T::zero() && v != T::zero())
        .map(|(&ri, &v)| ri / (T::of(SAFETY) * v.abs()))
        .fold(T::infinity(), |a, b| a.min(b))
}

/// RK4 on the squared radii with recording step `dt`. A step that would
/// break `r > 5 dt |r'|` is split into substeps, so only the initial step is
/// checked against the caller's `dt`. Circles reaching `R_MIN` are removed.
pub fn evolve_circles<T: Real>(system: &CircleSystem<T>, dt: T, t_final: T) -> Result<CircleTrajectory<T>> {
    if !(dt > T::zero()) || t_final < T::zero() {
        return Err(Error::pre("dt > 0 and t_final >= 0"));
    }
    let r0 = system.radii.clone();
    if dt > admissible(&r0) {
        return Err(Error::StepSize {
            t: 0.0,
            detail: format!("dt = {dt} exceeds r / (5 |r'|) = {}", admissible(&r0)),
        });
    }
    let r_min = T::of(R_MIN);
    let n_steps = (t_final / dt - T::of(1e-9)).ceil().max(T::zero()).as_f64() as usize;
    let mut out = CircleTrajectory { times: vec![T::zero()], radii: vec![r0.clone()], extinctions: Vec::new() };
    let radii = |s: &[T]| -> Vec<T> { s.iter().map(|&v| if v > T::zero() { v.sqrt() } else { T::zero() }).collect() };
    let mut sq: Vec<T> = r0.iter().map(|&r| r * r).collect();
    for k in 1..=n_steps {
        let t_end = T::of_usize(k) * dt;
        let mut t = T::of_usize(k - 1) * dt;
        while t < t_end {
            let h = (t_end - t).min(admissible(&radii(&sq)));
            sq = rk4(&sq, h);
            t = if h == t_end - t { t_end } else { t + h };
            for (i, si) in sq.iter_mut().enumerate() {
                if *si > T::zero() && *si <= r_min * r_min {
                    *si = T::zero();
                    out.extinctions.push(Extinction { t, index: i });
                }
            }
        }
        out.times.push(t_end);
        out.radii.push(radii(&sq));
    }
    Ok(out)
}

impl<T: Real> CircleTrajectory<T> {
    /// Radii at `t` by cubic Hermite interpolation between records.
    pub fn radii_at(&self, t: T) -> Option<Vec<T>> {
        let last = *self.times.last()?;
        if t < T::zero() || t > last + T::of(1e-12) {
            return None;
        }
        let k = self.times.partition_point(|&s| s <= t).clamp(1, self.times.len().max(2) - 1);
        if self.times.len() == 1 {
            return Some(self.radii[0].clone());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (a, b) = (&self.radii[k - 1], &self.radii[k]);
        let (da, db) = (circle_rhs(a), circle_rhs(b));
        let h = t1 - t0;
        let s = ((t - t0) / h).max(T::zero()).min(T::one());
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::of(2.0);
        let three = T::of(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        Some(
            (0..a.len())
                .map(|i| {
                    if a[i] > T::zero() && b[i] > T::zero() {
                        h00 * a[i] + h10 * h * da[i] + h01 * b[i] + h11 * h * db[i]
                    } else if b[i] > T::zero() {
                        b[i]
                    } else if s == T::zero() {
                        a[i]
                    } else {
                        T::zero()
                    }
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let n = self.radii.first().map_or(0, Vec::len);
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",r_{i}"));
        }
        out.push('\n');
        for (t, r) in self.times.iter().zip(&self.radii) {
            out.push_str(&t.to_string());
            for v in r {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Least-squares (Kasa) circle fit: returns `(center, radius)`.
pub fn fit_circle<T: Real>(points: &[[T; 2]]) -> Option<([T; 2], T)> {
    if points.len() < 3 {
        return None;
    }
    let m = T::of_usize(points.len());
    let (sx, sy) = points.iter().fold((T::zero(), T::zero()), |(a, b), p| (a + p[0], b + p[1]));
    let (mx, my) = (sx / m, sy / m);
    // Minimize sum (u^2 + v^2 + D u + E v + F)^2 in centred coordinates.
    let mut a = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    for p in points {
        let (u, v) = (p[0] - mx, p[1] - my);
        let row = [u, v, T::one()];
        let z = -(u * u + v * v);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = a[i][j] + row[i] * row[j];
            }
            rhs[i] = rhs[i] + row[i] * z;
        }
    }
    let sol = solve3(a, rhs)?;
    let cu = -sol[0] / T::of(2.0);
    let cv = -sol[1] / T::of(2.0);
    let r2 = cu * cu + cv * cv - sol[2];
    if !(r2 > T::zero()) {
        return None;
    }
    Some(([cu + mx, cv + my], r2.sqrt()))
}

#[allow(clippy::needless_range_loop)]
fn solve3<T: Real>(mut a: [[T; 3]; 3], mut b: [T; 3]) -> Option<[T; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col] == T::zero() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [T::zero(); 3];
    for i in (0..3).rev() {
        let mut s = b[i];
        for k in i + 1..3 {
            s = s - a[i][k] * x[k];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow<T> {
    pub t: T,
    pub fitted: Vec<T>,
    pub oracle: Vec<T>,
    pub error: T,
}

/// Loop count differs from the number of live oracle circles.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TopologyEvent<T> {
    pub t: T,
    pub loops: usize,
    pub circles: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison<T> {
    pub rows: Vec<CompareRow<T>>,
    pub max_error: T,
    pub event: Option<TopologyEvent<T>>,
}

fn wrapped_offset<T: Real>(a: [T; 2], b: [T; 2]) -> T {
    let dx = min_image(a[0] - b[0]);
    let dy = min_image(a[1] - b[1]);
    (dx * dx + dy * dy).sqrt()
}

fn fit_loop<T: Real>(l: &Loop<T>) -> Option<([T; 2], T)> {
    fit_circle(&l.points)
}

/// Fits a circle to every loop of each snapshot and compares radii with the
/// oracle at the snapshot time. Stops at the first topology mismatch.
pub fn compare_phase_field<T: Real>(
    snapshots: &[(T, Interface<T>)],
    oracle: &CircleTrajectory<T>,
    system: &CircleSystem<T>,
) -> Result<Comparison<T>> {
    let mut rows = Vec::new();
    let mut max_error = T::zero();
    for (t, iface) in snapshots {
        let Some(radii) = oracle.radii_at(*t) else {
            return Err(Error::pre(format!("snapshot time {t} outside oracle trajectory")));
        };
        let live: Vec<usize> = (0..radii.len()).filter(|&i| radii[i] > T::zero()).collect();
        let loops = iface.loops();
        let fits: Vec<_> = loops.iter().filter_map(fit_loop).collect();
        if fits.len() != loops.len() || loops.len() != live.len() {
            let event = TopologyEvent { t: *t, loops: loops.len(), circles: live.len() };
            return Ok(Comparison { rows, max_error, event: Some(event) });
        }
        let mut fitted = vec![T::zero(); radii.len()];
        let mut used = vec![false; fits.len()];
        let mut error = T::zero();
        for &i in &live {
            let c = system.centers[i];
            let best = (0..fits.len())
                .filter(|&j| !used[j])
                .min_by(|&a, &b| {
                    let da = wrapped_offset(fits[a].0, c);
                    let db = wrapped_offset(fits[b].0, c);
                    da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("as many fits as live circles");
            used[best] = true;
            fitted[i] = fits[best].1;
            error = error.max((fits[best].1 - radii[i]).abs());
        }
        max_error = max_error.max(error);
        rows.push(CompareRow { t: *t, fitted, oracle: radii, error });
    }
    Ok(Comparison { rows, max_error, event: None })
}

impl<T: Real> Comparison<T> {
    pub fn to_csv(&self) -> String {
        let n = self.rows.first().map_or(0, |r| r.oracle.len());
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",r_fit_{i}"));
        }
        for i in 1..=n {
            out.push_str(&format!(",r_ode_{i}"));
        }
        out.push_str(",error\n");
        for row in &self.rows {
            out.push_str(&row.t.to_string());
            for v in row.fitted.iter().chain(&row.oracle) {
                out.push_str(&format!(",{v}"));
            }
            out.push_str(&format!(",{}\n", row.error));
        }
        out
    }
}
