//! CSV rows, per-run summary and manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::LabResult;

pub const CSV_HEADER: &str = "run_id,experiment,quantity,k,q,r,alpha,epsilon,dt,seed,value";

/// One measured value; `None` columns are written empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub k: Option<i32>,
    pub q: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<usize>,
    pub epsilon: Option<f64>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub value: f64,
}

impl Row {
    pub fn new(quantity: impl Into<String>, value: f64) -> Self {
        Self {
            quantity: quantity.into(),
            k: None,
            q: None,
            r: None,
            alpha: None,
            epsilon: None,
            dt: None,
            seed: None,
            value,
        }
    }

    pub fn k(mut self, k: i32) -> Self {
        self.k = Some(k);
        self
    }

    pub fn qr(mut self, q: f64, r: f64) -> Self {
        self.q = Some(q);
        self.r = Some(r);
        self
    }

    pub fn alpha(mut self, a: usize) -> Self {
        self.alpha = Some(a);
        self
    }

    pub fn epsilon(mut self, e: f64) -> Self {
        self.epsilon = Some(e);
        self
    }

    pub fn dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seed = Some(s);
        self
    }

    /// Summary key: the quantity followed by every populated column.
    pub fn key(&self) -> String {
        let mut s = self.quantity.clone();
        let mut add = |name: &str, v: Option<String>| {
            if let Some(v) = v {
                let _ = write!(s, "|{name}={v}");
            }
        };
        add("k", self.k.map(|v| v.to_string()));
        add("q", self.q.map(format_number));
        add("r", self.r.map(format_number));
        add("alpha", self.alpha.map(|v| v.to_string()));
        add("epsilon", self.epsilon.map(format_number));
        add("dt", self.dt.map(format_number));
        add("seed", self.seed.map(|v| v.to_string()));
        s
    }
}

/// Shortest round-trip representation, in exponent form for very small or
/// large magnitudes; infinities as `inf`.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

pub fn run_id(cfg: &ExperimentConfig) -> String {
    format!("{}-{}", cfg.experiment.name(), &config_hash(cfg)[..12])
}

pub fn to_csv(run_id: &str, experiment: &str, rows: &[Row]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{run_id},{experiment},{},{},{},{},{},{},{},{},{}",
            r.quantity,
            opt(r.k.map(|v| v.to_string())),
            opt(r.q.map(format_number)),
            opt(r.r.map(format_number)),
            opt(r.alpha.map(|v| v.to_string())),
            opt(r.epsilon.map(format_number)),
            opt(r.dt.map(format_number)),
            opt(r.seed.map(|v| v.to_string())),
            format_number(r.value),
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub run_id: &'a str,
    pub config: serde_json::Value,
    pub quantities: BTreeMap<String, Option<f64>>,
}

pub fn summary<'a>(run_id: &'a str, cfg: &ExperimentConfig, rows: &[Row]) -> Summary<'a> {
    // JSON has no infinities or NaN; those become null.
    let quantities = rows
        .iter()
        .map(|r| (r.key(), r.value.is_finite().then_some(r.value)))
        .collect();
    Summary { run_id, config: serde_json::to_value(cfg).expect("config serializes"), quantities }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointFailure {
    pub point: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub experiment: String,
    pub config_hash: String,
    pub code_version: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub files: Vec<String>,
    /// Set when some sweep points failed; their rows are missing.
    pub partial: bool,
    pub failures: Vec<PointFailure>,
    pub warnings: Vec<String>,
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes `results.csv`, `summary.json` and `manifest.json` into `dir`,
/// returning the manifest path.
pub fn write_run(
    dir: &Path,
    cfg: &ExperimentConfig,
    rows: &[Row],
    mut manifest: RunManifest,
) -> LabResult<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let csv = dir.join("results.csv");
    std::fs::write(&csv, to_csv(&manifest.run_id, cfg.experiment.name(), rows))?;
    let summary_path = dir.join("summary.json");
    let s = summary(&manifest.run_id, cfg, rows);
    std::fs::write(&summary_path, serde_json::to_string_pretty(&s).expect("summary serializes") + "\n")?;
    manifest.files = vec!["results.csv".into(), "summary.json".into()];
    manifest.finished_unix = unix_now();
    let manifest_path = dir.join("manifest.json");
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
    Ok(manifest_path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_keys() {
        let rows = vec![
            Row::new("orth_defect", 0.5).epsilon(0.1).seed(3),
            Row::new("sk", 2.0).k(1).qr(2.0, f64::INFINITY).alpha(0),
        ];
        let csv = to_csv("id", "gauge_defects", &rows);
        assert_eq!(
            csv,
            "run_id,experiment,quantity,k,q,r,alpha,epsilon,dt,seed,value\n\
             id,gauge_defects,orth_defect,,,,,0.1,,3,0.5\n\
             id,gauge_defects,sk,1,2,inf,0,,,,2\n"
        );
        assert_eq!(rows[1].key(), "sk|k=1|q=2|r=inf|alpha=0");
    }
}
