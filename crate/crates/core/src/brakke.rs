//! Space-time ledger of the diffuse Brakke identity and its weak inequality.
//!
//! Test functions are separable, `eta(t) chi(|x - x0| / r)`, so every term is
//! a time sum of `chi`-weighted spatial integrals scaled by `eta` or `eta'`.
//! The transport term pairs one-sided differences of the sampled bump with
//! those of `phi`, which is the exact variation of the discrete energy.

use serde::Serialize;

use crate::diagnostics::{approx_curvature, energy_density_of};
use crate::error::{Error, Result};
use crate::grid_fields::{gradient_pairing, ScalarField, TorusGrid};
use crate::scalar::{periodic_distance, Real};
use crate::solver::{potential_w, rhs, Observer, PhaseState, SolverParams};

/// Temporal factor of a test function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeProfile {
    /// `eta = 1` on the window.
    Constant,
    /// `(1 - tau^2)^2` with `tau` the window coordinate in `[-1, 1]`.
    Hat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction<T> {
    pub center: Vec<T>,
    pub radius: T,
    pub t1: T,
    pub t2: T,
    pub time: TimeProfile,
}

/// Bump profile `(1 - s^2)^2` on `s < 1`.
pub fn bump<T: Real>(s: T) -> T {
    if s >= T::one() {
        T::zero()
    } else {
        let u = T::one() - s * s;
        u * u
    }
}

impl<T: Real> TestFunction<T> {
    pub fn new(center: Vec<T>, radius: T, t1: T, t2: T, time: TimeProfile) -> Result<Self> {
        if !(radius > T::zero() && radius < T::of(0.5)) {
            return Err(Error::pre(format!("test radius in (0, 1/2), got {radius}")));
        }
        if !(t1 >= T::zero() && t2 > t1) {
            return Err(Error::pre(format!("test window 0 <= t1 < t2, got [{t1}, {t2}]")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::pre("finite test centre"));
        }
        Ok(Self { center, radius, t1, t2, time })
    }

    pub fn spatial(&self, grid: TorusGrid) -> Result<ScalarField<T>> {
        if self.center.len() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "test centre has {} coordinates, grid is {}-d",
                self.center.len(),
                grid.dim()
            )));
        }
        Ok(ScalarField::from_fn(grid, |x| bump(periodic_distance(x, &self.center) / self.radius)))
    }

    fn tau(&self, t: T) -> T {
        (T::of(2.0) * t - self.t1 - self.t2) / (self.t2 - self.t1)
    }

    pub fn eta(&self, t: T) -> T {
        match self.time {
            TimeProfile::Constant => T::one(),
            TimeProfile::Hat => bump(self.tau(t).abs()),
        }
    }

    pub fn eta_dot(&self, t: T) -> T {
        match self.time {
            TimeProfile::Constant => T::zero(),
            TimeProfile::Hat => {
                let tau = self.tau(t);
                if tau.abs() >= T::one() {
                    return T::zero();
                }
                // d/dt (1 - tau^2)^2 = -4 tau (1 - tau^2) dtau/dt
                -T::of(8.0) * tau * (T::one() - tau * tau) / (self.t2 - self.t1)
            }
        }
    }

    /// `sup |phi_test|`.
    pub fn sup_norm(&self) -> T {
        T::one()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestSummary<T> {
    pub x0: Vec<T>,
    pub r: T,
    pub t1: T,
    pub t2: T,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BrakkeTerms<T> {
    pub lhs: T,
    pub term_curv: T,
    pub term_vel: T,
    pub term_lambda: T,
    pub term_transport: T,
    pub term_dt: T,
}

impl<T: Real> BrakkeTerms<T> {
    fn zero() -> Self {
        Self {
            lhs: T::zero(),
            term_curv: T::zero(),
            term_vel: T::zero(),
            term_lambda: T::zero(),
            term_transport: T::zero(),
            term_dt: T::zero(),
        }
    }

    fn rhs_sum(&self) -> T {
        self.term_curv + self.term_vel + self.term_lambda + self.term_transport + self.term_dt
    }

    fn magnitude(&self) -> T {
        self.lhs.abs()
            + self.term_curv.abs()
            + self.term_vel.abs()
            + self.term_lambda.abs()
            + self.term_transport.abs()
            + self.term_dt.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BrakkeReport<T> {
    pub test: TestSummary<T>,
    pub terms: BrakkeTerms<T>,
    pub residual: T,
    pub normalized_residual: T,
    #[serde(rename = "C_emp")]
    pub c_emp: T,
    pub weak_margin: Option<T>,
}

impl<T: Real> BrakkeReport<T> {
    fn build(test: &TestFunction<T>, terms: BrakkeTerms<T>, t1: T, t2: T, d: usize) -> Self {
        let residual = terms.lhs - terms.rhs_sum();
        let mag = terms.magnitude();
        let normalized_residual = if mag > T::zero() { residual.abs() / mag } else { T::zero() };
        let scale = correction_scale(test, t1, t2, d);
        Self {
            test: TestSummary { x0: test.center.clone(), r: test.radius, t1, t2 },
            c_emp: terms.term_lambda / scale,
            terms,
            residual,
            normalized_residual,
            weak_margin: None,
        }
    }

    /// Slack of the weak inequality with correction constant `c`.
    pub fn margin_with(&self, c: T, d: usize) -> T {
        let r = self.test.r;
        let scale = r.powi(d as i32 - 1) * (T::one() + self.test.t2 - self.test.t1);
        let t = &self.terms;
        scale * c + (t.term_curv + t.term_vel + t.term_transport + t.term_dt) - t.lhs
    }

    pub fn with_constant(mut self, c: T, d: usize) -> Self {
        self.weak_margin = Some(self.margin_with(c, d));
        self
    }
}

fn correction_scale<T: Real>(test: &TestFunction<T>, t1: T, t2: T, d: usize) -> T {
    test.radius.powi(d as i32 - 1) * (T::one() + t2 - t1) * test.sup_norm()
}

struct Window<T> {
    test: TestFunction<T>,
    chi: ScalarField<T>,
    n1: u64,
    n2: u64,
    next: u64,
    terms: BrakkeTerms<T>,
}

/// Nearest step index of time `t`.
fn step_of<T: Real>(t: T, dt: T) -> u64 {
    (t / dt).round().as_f64().max(0.0) as u64
}

/// Streaming evaluator fed with consecutive states.
///
/// Window ends are snapped to the nearest step; the report carries the
/// snapped times.
pub struct BrakkeAccumulator<T> {
    params: SolverParams<T>,
    windows: Vec<Window<T>>,
    lambda_sq: T,
    lambda_window: (u64, u64),
    lambda_next: u64,
    failure: Option<Error>,
}

impl<T: Real> BrakkeAccumulator<T> {
    pub fn new(params: &SolverParams<T>, tests: &[TestFunction<T>]) -> Result<Self> {
        let dt = params.dt;
        let windows = tests
            .iter()
            .map(|test| {
                let n1 = step_of(test.t1, dt);
                let n2 = step_of(test.t2, dt).max(n1 + 1);
                Ok(Window {
                    chi: test.spatial(params.grid)?,
                    test: test.clone(),
                    n1,
                    n2,
                    next: n1,
                    terms: BrakkeTerms::zero(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: params.clone(),
            windows,
            lambda_sq: T::zero(),
            lambda_window: (0, u64::MAX),
            lambda_next: 0,
            failure: None,
        })
    }

    /// Also accumulate `sum dt lambda^2` over `[t1, t2)`.
    pub fn track_lambda(mut self, t1: T, t2: T) -> Self {
        let dt = self.params.dt;
        self.lambda_window = (step_of(t1, dt), step_of(t2, dt));
        self.lambda_next = self.lambda_window.0;
        self
    }

    /// Feeds the next state. States outside every window are ignored.
    pub fn push(&mut self, state: &PhaseState<T>) -> Result<()> {
        let p = &self.params;
        let k = state.step;
        let dt = p.dt;
        let eps = p.epsilon;

        let (l0, l1) = self.lambda_window;
        if k >= l0 && k < l1 {
            if k != self.lambda_next {
                return Err(missing(l0, l1, dt, self.lambda_next, k));
            }
            self.lambda_sq = self.lambda_sq + dt * state.lambda * state.lambda;
            self.lambda_next += 1;
        }

        let active: Vec<usize> = (0..self.windows.len())
            .filter(|&i| {
                let w = &self.windows[i];
                k >= w.n1 && k <= w.n2
            })
            .collect();
        if active.is_empty() {
            return Ok(());
        }
        for &i in &active {
            let w = &self.windows[i];
            if k != w.next {
                return Err(missing(w.n1, w.n2, dt, w.next, k));
            }
        }

        let t = T::of_usize(k as usize) * dt;
        let energy = energy_density_of(&state.phi, eps);
        let needs_flow = active.iter().any(|&i| k < self.windows[i].n2);
        let flow = if needs_flow {
            let phi_t = rhs(&state.phi, state.lambda, p);
            let curv = approx_curvature(state, p);
            let half_eps = T::of(0.5) * eps;
            let lam2 = state.lambda * state.lambda;
            let curv_sq = curv.map(|v| -half_eps * v * v);
            let vel_sq = phi_t.map(|v| -half_eps * v * v);
            let lam_w = state.phi.map(|v| lam2 * potential_w(v) / eps);
            Some((phi_t, curv_sq, vel_sq, lam_w))
        } else {
            None
        };

        for &i in &active {
            let w = &mut self.windows[i];
            let eta = w.test.eta(t);
            let mu = w.chi.integrate_product(&energy)?;
            if k == w.n1 {
                w.terms.lhs = w.terms.lhs - eta * mu;
            }
            if k == w.n2 {
                w.terms.lhs = w.terms.lhs + eta * mu;
            } else if let Some((phi_t, curv_sq, vel_sq, lam_w)) = &flow {
                let pairing = gradient_pairing(&w.chi, &state.phi)?;
                let c = dt * eta;
                w.terms.term_curv = w.terms.term_curv + c * w.chi.integrate_product(curv_sq)?;
                w.terms.term_vel = w.terms.term_vel + c * w.chi.integrate_product(vel_sq)?;
                w.terms.term_lambda = w.terms.term_lambda + c * w.chi.integrate_product(lam_w)?;
                w.terms.term_transport =
                    w.terms.term_transport - c * eps * phi_t.integrate_product(&pairing)?;
                w.terms.term_dt = w.terms.term_dt + dt * w.test.eta_dot(t) * mu;
            }
            w.next += 1;
        }
        Ok(())
    }

    /// Reports in test order; errors if any window was not fully covered.
    pub fn finish(self) -> Result<Vec<BrakkeReport<T>>> {
        if let Some(e) = self.failure {
            return Err(e);
        }
        let dt = self.params.dt;
        let d = self.params.grid.dim();
        self.windows
            .into_iter()
            .map(|w| {
                if w.next != w.n2 + 1 {
                    return Err(missing(w.n1, w.n2, dt, w.next, w.n2 + 1));
                }
                let t1 = T::of_usize(w.n1 as usize) * dt;
                let t2 = T::of_usize(w.n2 as usize) * dt;
                Ok(BrakkeReport::build(&w.test, w.terms, t1, t2, d))
            })
            .collect()
    }

    /// `sum dt lambda^2` over the tracked window and its ratio to `1 + t2 - t1`.
    pub fn lambda_l2(&self) -> Result<LambdaL2<T>> {
        let (l0, l1) = self.lambda_window;
        if l1 == u64::MAX {
            return Err(Error::pre("lambda window not tracked"));
        }
        if self.lambda_next != l1 {
            return Err(missing(l0, l1, self.params.dt, self.lambda_next, l1));
        }
        let dt = self.params.dt;
        let span = T::of_usize((l1 - l0) as usize) * dt;
        Ok(LambdaL2 { integral: self.lambda_sq, ratio: self.lambda_sq / (T::one() + span) })
    }
}

fn missing<T: Real>(n1: u64, n2: u64, dt: T, expected: u64, got: u64) -> Error {
    Error::MissingSteps {
        t1: n1 as f64 * dt.as_f64(),
        t2: n2 as f64 * dt.as_f64(),
        detail: format!("expected step {expected}, got {got}"),
    }
}

impl<T: Real> Observer<T> for BrakkeAccumulator<T> {
    fn observe(&mut self, state: &PhaseState<T>, _params: &SolverParams<T>) {
        if self.failure.is_none() {
            if let Err(e) = self.push(state) {
                self.failure = Some(e);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaL2<T> {
    pub integral: T,
    pub ratio: T,
}

/// Brakke ledger of `test` over a trajectory of consecutive states.
pub fn check_identity<T: Real>(
    trajectory: &[PhaseState<T>],
    test: &TestFunction<T>,
    params: &SolverParams<T>,
) -> Result<BrakkeReport<T>> {
    let mut acc = BrakkeAccumulator::new(params, std::slice::from_ref(test))?;
    for s in trajectory {
        acc.push(s)?;
    }
    Ok(acc.finish()?.remove(0))
}

/// Returns `(weak_margin, C_emp)`.
pub fn check_weak_inequality<T: Real>(
    trajectory: &[PhaseState<T>],
    test: &TestFunction<T>,
    params: &SolverParams<T>,
    c: T,
) -> Result<(T, T)> {
    let report = check_identity(trajectory, test, params)?;
    Ok((report.margin_with(c, params.grid.dim()), report.c_emp))
}

pub fn lambda_l2_report<T: Real>(
    trajectory: &[PhaseState<T>],
    params: &SolverParams<T>,
    t1: T,
    t2: T,
) -> Result<LambdaL2<T>> {
    let mut acc = BrakkeAccumulator::new(params, &[])?.track_lambda(t1, t2);
    for s in trajectory {
        acc.push(s)?;
    }
    acc.lambda_l2()
}
