//! Epsilon sweeps with trend assertions over the per-configuration results.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::brakke::{BrakkeAccumulator, BrakkeReport, LambdaL2, TestFunction};
use crate::diagnostics::{DiagnosticsRecord, SampleDesign, CSV_HEADER};
use crate::error::{Error, Result};
use crate::grid_fields::{write_atomic, TorusGrid};
use crate::initial_data::{build_phi0, InitialProfile, Region, MIN_CELLS_PER_EPSILON};
use crate::oracle2d::{evolve_circles, CircleSystem};
use crate::scalar::Real;
use crate::solver::{run, PhaseState, Scheme, SolverParams};

/// Slack for monotone trends.
pub const MONOTONE_SLACK: f64 = 1.2;
/// Allowed max/min spread for uniform bounds.
pub const UNIFORM_FACTOR: f64 = 3.0;

/// Smallest power of two `n >= 8` that resolves `epsilon`.
pub fn resolution_for<T: Real>(epsilon: T) -> usize {
    let cells = (T::of(MIN_CELLS_PER_EPSILON) / epsilon).ceil().as_f64() as usize;
    cells.max(8).next_power_of_two()
}

/// Everything recorded along one run.
#[derive(Clone, Debug)]
pub struct RunSummary<T> {
    pub records: Vec<DiagnosticsRecord<T>>,
    pub final_state: PhaseState<T>,
    pub brakke: Vec<BrakkeReport<T>>,
    pub lambda_l2: LambdaL2<T>,
}

/// Runs `params` from `profile`, computing diagnostics at step 0, every
/// `params.record_stride` steps and at the end, and feeding every step to the
/// Brakke ledger. `on_step` sees every state, with its record when one was taken.
pub fn run_scenario<T, F>(
    params: &SolverParams<T>,
    profile: &InitialProfile<T>,
    tests: &[TestFunction<T>],
    design: &SampleDesign<T>,
    mut on_step: F,
) -> Result<RunSummary<T>>
where
    T: Real,
    F: FnMut(&PhaseState<T>, Option<&DiagnosticsRecord<T>>) -> Result<()>,
{
    let stride = params.record_stride.max(1) as u64;
    let n_steps = params.n_steps();
    let mut every = params.clone();
    every.record_stride = 1;
    let t_end = T::of_usize(n_steps as usize) * params.dt;
    let mut acc = BrakkeAccumulator::new(params, tests)?.track_lambda(T::zero(), t_end);
    let mut records = Vec::new();
    let mut failure: Option<Error> = None;
    let mut obs = |s: &PhaseState<T>, p: &SolverParams<T>| {
        if failure.is_some() {
            return;
        }
        let outcome = acc.push(s).and_then(|_| {
            if s.step.is_multiple_of(stride) || s.step == n_steps {
                let rec = DiagnosticsRecord::compute(s, p, design)?;
                on_step(s, Some(&rec))?;
                records.push(rec);
            } else {
                on_step(s, None)?;
            }
            Ok(())
        });
        if let Err(e) = outcome {
            failure = Some(e);
        }
    };
    let final_state = run(&every, profile, &mut [&mut obs]).map_err(|f| f.error)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let lambda_l2 = acc.lambda_l2()?;
    let brakke = acc.finish()?;
    Ok(RunSummary { records, final_state, brakke, lambda_l2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrendKind {
    /// Non-increasing as epsilon decreases, up to the slack factor per step.
    Decreasing,
    /// `max / min` across the sweep within the factor.
    UniformBound,
    /// `max` across the sweep at most the factor.
    AtMost,
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendAssertion {
    pub observable: String,
    pub kind: TrendKind,
    pub factor: f64,
    /// The limit statement this trend stands in for.
    pub statement: String,
}

impl TrendAssertion {
    pub fn decreasing(observable: &str, statement: &str) -> Self {
        Self { observable: observable.into(), kind: TrendKind::Decreasing, factor: MONOTONE_SLACK, statement: statement.into() }
    }

    pub fn uniform(observable: &str, statement: &str) -> Self {
        Self { observable: observable.into(), kind: TrendKind::UniformBound, factor: UNIFORM_FACTOR, statement: statement.into() }
    }

    pub fn at_most(observable: &str, bound: f64, statement: &str) -> Self {
        Self { observable: observable.into(), kind: TrendKind::AtMost, factor: bound, statement: statement.into() }
    }

    /// Pass flag and a one-line explanation for values ordered by decreasing epsilon.
    pub fn evaluate(&self, values: &[f64]) -> (bool, String) {
        if values.iter().any(|v| !v.is_finite()) {
            return (false, "non-finite value".into());
        }
        match self.kind {
            TrendKind::Decreasing => {
                for (k, w) in values.windows(2).enumerate() {
                    if w[1] > self.factor * w[0] {
                        return (false, format!("member {} = {} exceeds {} x member {} = {}", k + 1, w[1], self.factor, k, w[0]));
                    }
                }
                (true, "monotone within slack".into())
            }
            TrendKind::UniformBound => {
                if values.is_empty() {
                    return (true, "no members".into());
                }
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                if min <= 0.0 {
                    let ok = max <= 0.0;
                    return (ok, format!("min {min}, max {max}"));
                }
                let spread = max / min;
                (spread <= self.factor, format!("max/min = {spread}"))
            }
            TrendKind::AtMost => {
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (max <= self.factor, format!("max = {max}"))
            }
        }
    }
}

/// Defaults used by the command line.
pub fn standard_assertions() -> Vec<TrendAssertion> {
    vec![
        TrendAssertion::decreasing("xi_ratio", "discrepancy measure vanishes as epsilon -> 0"),
        TrendAssertion::decreasing("vol_psi_error", "phase volume converges to the initial volume"),
        TrendAssertion::uniform("lambda_l2_ratio", "multipliers bounded in L2(0, T) uniformly in epsilon"),
        TrendAssertion::uniform("c_emp_max", "correction constant of the weak Brakke inequality uniform in epsilon"),
        TrendAssertion::at_most("density_ratio_sup_max", 2.0, "upper density bound for the diffuse surface measures"),
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan<T> {
    pub dim: usize,
    pub region: Region<T>,
    pub alpha: T,
    /// Strictly decreasing.
    pub epsilons: Vec<T>,
    pub scheme: Scheme,
    pub t_final: T,
    pub record_stride: usize,
    pub tests: Vec<TestFunction<T>>,
    pub assertions: Vec<TrendAssertion>,
    /// Per-configuration diagnostics CSVs are written here when set.
    pub output_dir: Option<PathBuf>,
}

impl<T: Real> SweepPlan<T> {
    pub fn configurations(&self) -> Result<Vec<(SolverParams<T>, InitialProfile<T>)>> {
        if self.epsilons.is_empty() {
            return Err(Error::pre("at least one epsilon"));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::pre("epsilons strictly decreasing"));
        }
        self.epsilons
            .iter()
            .map(|&eps| {
                let n = resolution_for(eps);
                let grid = TorusGrid::new(self.dim, n)?;
                let mut params = SolverParams::with_auto_dt(grid, eps, self.alpha, self.t_final, self.scheme)?;
                params.record_stride = self.record_stride.max(1);
                let profile = build_phi0(&self.region, eps, grid)?;
                Ok((params, profile))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Environment<T> {
    pub d: usize,
    pub n: usize,
    pub epsilon: T,
    pub alpha: T,
    pub dt: T,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigResult<T> {
    pub environment: Environment<T>,
    pub csv_path: Option<String>,
    pub observables: BTreeMap<String, T>,
    pub brakke: Vec<BrakkeReport<T>>,
    #[serde(skip)]
    pub records: Vec<DiagnosticsRecord<T>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssertionResult {
    pub observable: String,
    pub kind: TrendKind,
    pub factor: f64,
    pub statement: String,
    pub values: Vec<f64>,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport<T> {
    pub monotone_slack: f64,
    pub uniform_factor: f64,
    pub configurations: Vec<ConfigResult<T>>,
    pub assertions: Vec<AssertionResult>,
    pub all_pass: bool,
}

impl<T: Real + Serialize> SweepReport<T> {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }
}

fn summarize<T: Real>(
    plan: &SweepPlan<T>,
    params: &SolverParams<T>,
    profile: &InitialProfile<T>,
    summary: RunSummary<T>,
    csv_path: Option<String>,
) -> Result<ConfigResult<T>> {
    let d = params.grid.dim();
    let last = summary.records.last().expect("final record").clone();
    let mut obs = BTreeMap::new();
    for name in CSV_HEADER.split(',') {
        obs.insert(name.to_string(), last.column(name).expect("header column"));
    }
    obs.insert("xi_ratio".into(), last.xi_total / last.e_s);
    let volume = plan.region.volume(d);
    obs.insert("vol_psi_error".into(), (last.vol_psi - volume).abs());
    let max_of = |f: &dyn Fn(&DiagnosticsRecord<T>) -> T| summary.records.iter().map(f).fold(T::neg_infinity(), |a, b| a.max(b));
    obs.insert("density_ratio_sup_max".into(), max_of(&|r| r.density_ratio_sup));
    obs.insert("vol_k_error_max".into(), max_of(&|r| (r.vol_k - profile.volume_target).abs()));
    obs.insert("lambda_l2".into(), summary.lambda_l2.integral);
    obs.insert("lambda_l2_ratio".into(), summary.lambda_l2.ratio);
    if d == 2 {
        if let Ok(system) = CircleSystem::from_region(&plan.region) {
            let step = T::of(1e-5).min(params.t_final.max(T::of(1e-5)));
            let oracle = evolve_circles(&system, step, params.t_final)?;
            let r = oracle.radii_at(last.t.min(*oracle.times.last().unwrap())).expect("inside oracle");
            let perimeter = T::of(2.0) * T::PI() * r.iter().fold(T::zero(), |a, &b| a + b);
            obs.insert("mu_error".into(), (last.mu_total - perimeter).abs());
        }
    }
    if !summary.brakke.is_empty() {
        let c = summary.brakke.iter().map(|b| b.c_emp).fold(T::neg_infinity(), |a, b| a.max(b));
        let res = summary.brakke.iter().map(|b| b.normalized_residual).fold(T::neg_infinity(), |a, b| a.max(b));
        obs.insert("c_emp_max".into(), c);
        obs.insert("brakke_residual_max".into(), res);
    }
    Ok(ConfigResult {
        environment: Environment {
            d,
            n: params.grid.n(),
            epsilon: params.epsilon,
            alpha: params.alpha,
            dt: params.dt,
            scheme: params.scheme,
        },
        csv_path,
        observables: obs,
        brakke: summary.brakke,
        records: summary.records,
    })
}

fn csv_of<T: Real>(records: &[DiagnosticsRecord<T>]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Runs every configuration (in parallel) and folds the results in plan order.
pub fn run_sweep<T: Real>(plan: &SweepPlan<T>) -> Result<SweepReport<T>> {
    let configs = plan.configurations()?;
    let design = SampleDesign::standard(plan.dim);
    let results: Vec<Result<ConfigResult<T>>> = configs
        .par_iter()
        .map(|(params, profile)| {
            let tag = |e: Error| Error::InConfig { epsilon: params.epsilon.as_f64(), n: params.grid.n(), source: Box::new(e) };
            let summary = run_scenario(params, profile, &plan.tests, &design, |_, _| Ok(())).map_err(tag)?;
            let csv_path = match &plan.output_dir {
                Some(dir) => {
                    let path = dir.join(format!("diagnostics_eps{}_n{}.csv", params.epsilon, params.grid.n()));
                    write_atomic(&path, csv_of(&summary.records).as_bytes()).map_err(tag)?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            summarize(plan, params, profile, summary, csv_path).map_err(tag)
        })
        .collect();
    let mut configurations = Vec::with_capacity(results.len());
    for r in results {
        configurations.push(r?);
    }

    // The weak inequality is checked with C = 2 x the largest observed C_emp.
    let c_emp = configurations
        .iter()
        .flat_map(|c| c.brakke.iter().map(|b| b.c_emp))
        .fold(T::zero(), |a, b| a.max(b));
    let c = T::of(2.0) * c_emp;
    for cfg in &mut configurations {
        let d = cfg.environment.d;
        cfg.brakke = cfg.brakke.drain(..).map(|b| b.with_constant(c, d)).collect();
        if !cfg.brakke.is_empty() {
            let m = cfg.brakke.iter().filter_map(|b| b.weak_margin).fold(T::infinity(), |a, b| a.min(b));
            cfg.observables.insert("weak_margin_min".into(), m);
        }
    }

    let assertions: Vec<AssertionResult> = plan
        .assertions
        .iter()
        .map(|a| {
            let values: Option<Vec<f64>> = configurations
                .iter()
                .map(|c| c.observables.get(&a.observable).map(|v| v.as_f64()))
                .collect();
            let (values, (pass, detail)) = match values {
                Some(v) => {
                    let outcome = a.evaluate(&v);
                    (v, outcome)
                }
                None => (Vec::new(), (false, format!("observable {} not recorded", a.observable))),
            };
            AssertionResult {
                observable: a.observable.clone(),
                kind: a.kind,
                factor: a.factor,
                statement: a.statement.clone(),
                values,
                pass,
                detail,
            }
        })
        .collect();
    let all_pass = assertions.iter().all(|a| a.pass);
    Ok(SweepReport {
        monotone_slack: MONOTONE_SLACK,
        uniform_factor: UNIFORM_FACTOR,
        configurations,
        assertions,
        all_pass,
    })
}
