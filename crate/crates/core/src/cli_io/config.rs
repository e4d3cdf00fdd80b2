use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::brakke::{TestFunction, TimeProfile};
use crate::diagnostics::CSV_HEADER;
use crate::error::{Error, Result};
use crate::grid_fields::TorusGrid;
use crate::initial_data::{build_phi0, check_resolution, InitialProfile, Region};
use crate::solver::{cfl_bound, Scheme, SolverParams, AUTO_DT_FRACTION};
use crate::sweep::{standard_assertions, SweepPlan, TrendAssertion};

fn default_alpha() -> f64 {
    0.99
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_stride() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub dim: usize,
    pub n: usize,
    pub epsilon: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    /// Filled with `0.9 x` the stability bound when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub force: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_stride")]
    pub record_stride: usize,
    /// 0 writes only the final state.
    #[serde(default)]
    pub snapshot_stride: usize,
    /// Diagnostics columns to write; all when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<String>>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: default_dir(), record_stride: default_stride(), snapshot_stride: 0, observables: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestSpec {
    pub center: Vec<f64>,
    pub radius: f64,
    pub t1: f64,
    pub t2: f64,
    #[serde(default = "default_time")]
    pub time: TimeProfile,
}

fn default_time() -> TimeProfile {
    TimeProfile::Constant
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BrakkeSection {
    #[serde(default)]
    pub tests: Vec<TestSpec>,
    /// Correction constant of the weak inequality; `2 x max C_emp` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_normalized_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    #[serde(default = "standard_assertions")]
    pub assertions: Vec<TrendAssertion>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub solver: SolverSection,
    pub region: Region<f64>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub brakke: BrakkeSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Serialize(e.to_string()))
}

impl RunConfig {
    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.solver.dim, self.solver.n)
    }

    /// Checks every precondition and fills the automatic step size.
    pub fn validate(&mut self) -> Result<()> {
        let grid = self.grid()?;
        check_resolution(self.solver.epsilon, grid)?;
        self.region.validate(self.solver.dim, self.solver.epsilon)?;
        let params = self.params()?;
        self.solver.dt = Some(params.dt);

        if let Some(cols) = &self.output.observables {
            let known: Vec<&str> = CSV_HEADER.split(',').collect();
            if let Some(bad) = cols.iter().find(|c| !known.contains(&c.as_str())) {
                return Err(Error::pre(format!("observable {bad:?} is one of {CSV_HEADER}")));
            }
        }
        for t in &self.brakke.tests {
            if t.center.len() != self.solver.dim {
                return Err(Error::pre("test centre has one coordinate per dimension"));
            }
            TestFunction::new(t.center.clone(), t.radius, t.t1, t.t2, t.time)?;
        }
        if let Some(c) = self.brakke.constant {
            if !(c >= 0.0) {
                return Err(Error::pre("brakke constant >= 0"));
            }
        }
        if let Some(sweep) = &self.sweep {
            self.sweep_plan_with(sweep)?.configurations()?;
        }
        Ok(())
    }

    /// Solver parameters; `dt` defaults to `0.9 x` the stability bound.
    pub fn params(&self) -> Result<SolverParams<f64>> {
        let s = &self.solver;
        let grid = self.grid()?;
        let auto = AUTO_DT_FRACTION * cfl_bound(s.scheme, grid, s.epsilon);
        let params = SolverParams {
            epsilon: s.epsilon,
            alpha: s.alpha,
            dt: s.dt.unwrap_or(auto),
            t_final: s.t_final,
            scheme: s.scheme,
            grid,
            record_stride: self.output.record_stride,
            force: s.force,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn profile(&self) -> Result<InitialProfile<f64>> {
        build_phi0(&self.region, self.solver.epsilon, self.grid()?)
    }

    pub fn tests(&self) -> Result<Vec<TestFunction<f64>>> {
        self.brakke
            .tests
            .iter()
            .map(|t| TestFunction::new(t.center.clone(), t.radius, t.t1, t.t2, t.time))
            .collect()
    }

    fn sweep_plan_with(&self, sweep: &SweepSection) -> Result<SweepPlan<f64>> {
        for &eps in &sweep.epsilons {
            if !(eps > 0.0) {
                return Err(Error::pre("sweep epsilons > 0"));
            }
        }
        Ok(SweepPlan {
            dim: self.solver.dim,
            region: self.region.clone(),
            alpha: self.solver.alpha,
            epsilons: sweep.epsilons.clone(),
            scheme: self.solver.scheme,
            t_final: self.solver.t_final,
            record_stride: self.output.record_stride,
            tests: self.tests()?,
            assertions: sweep.assertions.clone(),
            output_dir: Some(self.output.dir.clone()),
        })
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan<f64>> {
        let sweep = self.sweep.as_ref().ok_or_else(|| Error::pre("config has a [sweep] section"))?;
        self.sweep_plan_with(sweep)
    }
}
