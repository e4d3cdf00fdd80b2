//! Configuration files, commands and on-disk artifacts.

mod commands;
mod config;

pub use commands::{
    cmd_check_brakke, cmd_oracle_compare, cmd_run, cmd_sweep, error_json, snapshot_name, Outcome, BRAKKE_FILE,
    DIAGNOSTICS_FILE, FINAL_STATE_FILE, ORACLE_FILE, ORACLE_TRAJECTORY_FILE, SWEEP_FILE,
};
pub use config::{
    parse_config, serialize_config, BrakkeSection, OutputSection, RunConfig, SolverSection, SweepSection, TestSpec,
};

/// Reads and validates a configuration file.
pub fn load_config(path: &std::path::Path) -> crate::Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Caps kernel parallelism from `VPMF_THREADS` when set.
pub fn init_threads() -> crate::Result<()> {
    let Ok(v) = std::env::var("VPMF_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| crate::Error::Precondition(format!("VPMF_THREADS is a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(crate::Error::Precondition("VPMF_THREADS >= 1".into()));
    }
    // A pool already built (tests, embedding) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
