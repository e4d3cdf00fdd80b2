use std::fs;
use std::path::{Path, PathBuf};

use crate::brakke::{BrakkeAccumulator, BrakkeReport};
use crate::diagnostics::{extract_interface, DiagnosticsRecord, SampleDesign, CSV_HEADER};
use crate::error::{Error, Result};
use crate::grid_fields::{read_snapshot, write_atomic, write_snapshot};
use crate::oracle2d::{admissible, compare_phase_field, evolve_circles, CircleSystem};
use crate::solver::{PhaseState, SolverParams};
use crate::sweep::{run_scenario, run_sweep};

use super::config::RunConfig;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const FINAL_STATE_FILE: &str = "final_state.vpmf";
pub const BRAKKE_FILE: &str = "brakke_reports.json";
pub const ORACLE_FILE: &str = "oracle_compare.csv";
pub const ORACLE_TRAJECTORY_FILE: &str = "oracle_trajectory.csv";
pub const SWEEP_FILE: &str = "sweep_report.json";

/// Result of a command: whether its assertions held and what it wrote.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

pub fn snapshot_name(step: u64) -> String {
    format!("snapshot_{step:08}.vpmf")
}

fn diagnostics_csv(records: &[DiagnosticsRecord<f64>], columns: Option<&[String]>) -> String {
    let Some(cols) = columns else {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        return out;
    };
    // Keep the record's column order whatever order the config lists them in.
    let picked: Vec<&str> = CSV_HEADER.split(',').filter(|c| cols.iter().any(|x| x == c)).collect();
    let mut out = picked.join(",");
    out.push('\n');
    for r in records {
        let row: Vec<String> = picked.iter().map(|c| r.column(c).expect("known column").to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Integrates the configured scenario and writes diagnostics and snapshots
/// into the output directory.
pub fn cmd_run(cfg: &RunConfig) -> Result<Outcome> {
    let params = cfg.params()?;
    let profile = cfg.profile()?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir)?;
    let design = SampleDesign::standard(params.grid.dim());
    let stride = cfg.output.snapshot_stride as u64;
    let mut artifacts = Vec::new();
    let summary = run_scenario(&params, &profile, &[], &design, |s, _| {
        if stride > 0 && s.step % stride == 0 {
            let path = dir.join(snapshot_name(s.step));
            write_snapshot(&path, &s.phi, s.t)?;
            artifacts.push(path);
        }
        Ok(())
    })?;
    let csv = diagnostics_csv(&summary.records, cfg.output.observables.as_deref());
    let diag = dir.join(DIAGNOSTICS_FILE);
    write_atomic(&diag, csv.as_bytes())?;
    let fin = dir.join(FINAL_STATE_FILE);
    write_snapshot(&fin, &summary.final_state.phi, summary.final_state.t)?;
    artifacts.push(diag);
    artifacts.push(fin);
    let last = summary.records.last().expect("final record");
    Ok(Outcome {
        pass: true,
        artifacts,
        summary: format!("t = {}, E_total = {}, lambda = {}", last.t, last.e_total, last.lambda),
    })
}

/// Snapshot states in `dir` ordered by step, each paired with its step.
fn trajectory_files(dir: &Path, params: &SolverParams<f64>) -> Result<Vec<(u64, PathBuf)>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        let step = if let Some(rest) = name.strip_prefix("snapshot_").and_then(|r| r.strip_suffix(".vpmf")) {
            rest.parse::<u64>().ok()
        } else if name == FINAL_STATE_FILE {
            let (_, t) = read_snapshot::<f64>(&path)?;
            Some((t / params.dt).round() as u64)
        } else {
            None
        };
        if let Some(step) = step {
            files.push((step, path));
        }
    }
    files.sort();
    files.dedup_by_key(|f| f.0);
    Ok(files)
}

fn load_state(path: &Path, step: u64, v0: f64, params: &SolverParams<f64>) -> Result<PhaseState<f64>> {
    let (phi, _) = read_snapshot::<f64>(path)?;
    if phi.grid() != params.grid {
        return Err(Error::Snapshot { path: path.display().to_string(), reason: "grid differs from config".into() });
    }
    Ok(PhaseState::new(phi, step, v0, params))
}

/// Evaluates the configured test functions over the snapshots in `dir`.
pub fn cmd_check_brakke(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let params = cfg.params()?;
    let tests = cfg.tests()?;
    let out = dir.join(BRAKKE_FILE);
    if tests.is_empty() {
        write_atomic(&out, b"[]\n")?;
        return Ok(Outcome { pass: true, artifacts: vec![out], summary: "no tests".into() });
    }
    let v0 = cfg.profile()?.volume_target;
    let mut acc = BrakkeAccumulator::new(&params, &tests)?;
    let last_step = tests
        .iter()
        .map(|t| (t.t2 / params.dt).round() as u64)
        .max()
        .unwrap_or(0);
    for (step, path) in trajectory_files(dir, &params)? {
        if step > last_step {
            break;
        }
        acc.push(&load_state(&path, step, v0, &params)?)?;
    }
    let reports: Vec<BrakkeReport<f64>> = acc.finish()?;
    let d = params.grid.dim();
    let c = cfg
        .brakke
        .constant
        .unwrap_or_else(|| 2.0 * reports.iter().map(|r| r.c_emp).fold(0.0, f64::max));
    let reports: Vec<_> = reports.into_iter().map(|r| r.with_constant(c, d)).collect();
    let margins_ok = reports.iter().all(|r| r.weak_margin.unwrap_or(-1.0) >= 0.0);
    let residual_ok = match cfg.brakke.max_normalized_residual {
        Some(tol) => reports.iter().all(|r| r.normalized_residual <= tol),
        None => true,
    };
    let json = serde_json::to_string_pretty(&reports).map_err(|e| Error::Serialize(e.to_string()))?;
    write_atomic(&out, json.as_bytes())?;
    let worst = reports.iter().map(|r| r.normalized_residual).fold(0.0, f64::max);
    Ok(Outcome {
        pass: margins_ok && residual_ok,
        artifacts: vec![out],
        summary: format!("{} tests, C = {c}, max normalized residual {worst}", reports.len()),
    })
}

/// Compares the interface in each snapshot with the circle oracle; passes
/// when no topology event occurs and every radius is within two cells.
pub fn cmd_oracle_compare(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let params = cfg.params()?;
    if params.grid.dim() != 2 {
        return Err(Error::pre("oracle comparison is two-dimensional"));
    }
    let system = CircleSystem::from_region(&cfg.region)?;
    let files = trajectory_files(dir, &params)?;
    let t_last = files.last().map_or(0.0, |(s, _)| *s as f64 * params.dt);
    let step = 1e-5f64.min(0.5 * admissible(&system.radii));
    let oracle = evolve_circles(&system, step, t_last)?;
    let mut snaps = Vec::with_capacity(files.len());
    for (k, path) in &files {
        let (phi, _) = read_snapshot::<f64>(path)?;
        snaps.push((*k as f64 * params.dt, extract_interface(&phi)));
    }
    let cmp = compare_phase_field(&snaps, &oracle, &system)?;
    let out = dir.join(ORACLE_FILE);
    write_atomic(&out, cmp.to_csv().as_bytes())?;
    let traj = dir.join(ORACLE_TRAJECTORY_FILE);
    write_atomic(&traj, oracle.to_csv().as_bytes())?;
    let h = params.grid.spacing::<f64>();
    let pass = cmp.event.is_none() && cmp.max_error <= 2.0 * h;
    let event = match &cmp.event {
        Some(e) => format!(", topology event at t = {} ({} loops, {} circles)", e.t, e.loops, e.circles),
        None => String::new(),
    };
    Ok(Outcome {
        pass,
        artifacts: vec![out, traj],
        summary: format!("max radius error {} (2h = {}){event}", cmp.max_error, 2.0 * h),
    })
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let plan = cfg.sweep_plan()?;
    fs::create_dir_all(&cfg.output.dir)?;
    let report = run_sweep(&plan)?;
    let out = cfg.output.dir.join(SWEEP_FILE);
    write_atomic(&out, report.to_json()?.as_bytes())?;
    let failed: Vec<&str> = report.assertions.iter().filter(|a| !a.pass).map(|a| a.observable.as_str()).collect();
    let mut artifacts: Vec<PathBuf> = report.configurations.iter().filter_map(|c| c.csv_path.clone().map(PathBuf::from)).collect();
    artifacts.push(out);
    Ok(Outcome {
        pass: report.all_pass,
        artifacts,
        summary: if failed.is_empty() { "all trends hold".into() } else { format!("failed: {}", failed.join(", ")) },
    })
}

/// Machine-readable error line for stderr.
pub fn error_json(err: &Error) -> String {
    serde_json::json!({ "error": err.kind(), "message": err.to_string() }).to_string()
}
