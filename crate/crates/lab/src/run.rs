//! One `run` invocation: sweep, collect, write.

use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::experiments::{self, lp_checks, SweepOutcome};
use crate::output::{self, RunManifest};
use crate::Experiment;

pub const OUT_ENV: &str = "WAVEMAP_LAB_OUT";

/// `--out`, then `$WAVEMAP_LAB_OUT`, then the config's `out`, then `./out`.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<&str>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Debug)]
pub struct RunResult {
    pub run_id: String,
    pub dir: PathBuf,
    pub outcome: SweepOutcome,
    pub manifest_path: PathBuf,
}

impl RunResult {
    /// 0 on success, 2 when any sweep point failed.
    pub fn exit_code(&self) -> i32 {
        if self.outcome.is_partial() {
            2
        } else {
            0
        }
    }
}

/// Runs `cfg` and writes its artifacts under `out_root/<run_id>/`.
pub fn execute(cfg: &ExperimentConfig, out_root: &Path, jobs: Option<usize>) -> LabResult<RunResult> {
    let started = output::unix_now();
    let run_id = output::run_id(cfg);
    let warnings = experiments::warnings(cfg);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let outcome = experiments::run_sweep(cfg, jobs)?;
    let manifest = RunManifest {
        run_id: run_id.clone(),
        experiment: cfg.experiment.name().to_string(),
        config_hash: output::config_hash(cfg),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix: started,
        finished_unix: started,
        files: Vec::new(),
        partial: outcome.is_partial(),
        failures: outcome.failures.clone(),
        warnings,
    };
    let dir = out_root.join(&run_id);
    let manifest_path = output::write_run(&dir, cfg, &outcome.rows, manifest)?;
    Ok(RunResult { run_id, dir, outcome, manifest_path })
}

/// Exact-identity suite on the two acceptance grids; `(grid label, name,
/// residual)` for every check.
pub fn check_identities() -> LabResult<Vec<(String, &'static str, f64)>> {
    let mut out = Vec::new();
    for (n, points) in [(2, 32), (5, 16)] {
        let json = format!(r#"{{"experiment":"lp_checks","n":{n},"N":{points}}}"#);
        let cfg = ExperimentConfig::from_json(&json)?;
        debug_assert_eq!(cfg.experiment, Experiment::LpChecks);
        for (name, v) in lp_checks::identity_suite(cfg.grid(), cfg.m, 0)? {
            out.push((format!("{points}^{n}"), name, v));
        }
    }
    Ok(out)
}
