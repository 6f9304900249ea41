//! Experiment drivers. Each experiment splits its sweep into independent
//! points, measures every point into CSV rows and then appends sweep-level
//! statistics computed from the collected rows.

use std::sync::mpsc;

use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{LabError, LabResult};
use crate::output::{PointFailure, Row};

pub mod commutator;
pub mod envelope;
pub mod gauge;
pub mod lp_checks;
pub mod renorm;
pub mod solver;

/// One independent unit of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub epsilon: Option<f64>,
    pub seed: Option<u64>,
    /// Grid size override (commutator sweep) or pair index.
    pub resolution: Option<usize>,
    pub index: Option<usize>,
    /// Geodesic oracle in the convergence study.
    pub geodesic: bool,
}

impl Point {
    fn sample(epsilon: f64, seed: u64) -> Self {
        Self { epsilon: Some(epsilon), seed: Some(seed), resolution: None, index: None, geodesic: false }
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.geodesic {
            parts.push("geodesic".to_string());
        }
        if let Some(e) = self.epsilon {
            parts.push(format!("epsilon={e}"));
        }
        if let Some(s) = self.seed {
            parts.push(format!("seed={s}"));
        }
        if let Some(n) = self.resolution {
            parts.push(format!("N={n}"));
        }
        if let Some(i) = self.index {
            parts.push(format!("pair={i}"));
        }
        parts.join(",")
    }
}

fn epsilon_seed_points(cfg: &ExperimentConfig) -> Vec<Point> {
    cfg.epsilons
        .iter()
        .flat_map(|&e| cfg.seeds.iter().map(move |&s| Point::sample(e, s)))
        .collect()
}

pub fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    match cfg.experiment {
        Experiment::LpChecks => cfg
            .seeds
            .iter()
            .map(|&s| Point { epsilon: None, ..Point::sample(0.0, s) })
            .collect(),
        Experiment::SolverConvergence => {
            let geodesic = Point { epsilon: None, seed: None, resolution: None, index: None, geodesic: true };
            std::iter::once(geodesic).chain(epsilon_seed_points(cfg)).collect()
        }
        Experiment::GaugeDefects | Experiment::EnvelopeStability | Experiment::RenormCompare => {
            epsilon_seed_points(cfg)
        }
        Experiment::CommutatorSweep => commutator::points(cfg),
    }
}

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    match cfg.experiment {
        Experiment::LpChecks => lp_checks::run_point(cfg, p),
        Experiment::SolverConvergence => solver::run_point(cfg, p),
        Experiment::GaugeDefects => gauge::run_point(cfg, p),
        Experiment::CommutatorSweep => commutator::run_point(cfg, p),
        Experiment::EnvelopeStability => envelope::run_point(cfg, p),
        Experiment::RenormCompare => renorm::run_point(cfg, p),
    }
}

/// Sweep-level rows derived from the per-point rows.
pub fn summarise(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<Row> {
    match cfg.experiment {
        Experiment::LpChecks => lp_checks::summarise(rows),
        Experiment::SolverConvergence => solver::summarise(cfg, rows),
        Experiment::GaugeDefects => gauge::summarise(cfg, rows),
        Experiment::CommutatorSweep => commutator::summarise(cfg, rows),
        Experiment::EnvelopeStability => Vec::new(),
        Experiment::RenormCompare => renorm::summarise(cfg, rows),
    }
}

/// Warnings a run should surface before it starts.
pub fn warnings(cfg: &ExperimentConfig) -> Vec<String> {
    let mut out = Vec::new();
    if cfg.experiment == Experiment::RenormCompare && cfg.band_offsets().is_reduced() {
        let o = cfg.band_offsets();
        out.push(format!(
            "band offsets (low {}, high {}, gap {}) are below the default (10, 10, 5); \
             the frequency separation of the split is reduced",
            o.low, o.high, o.gap
        ));
    }
    out
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    /// Rows of the successful points in sweep order, then sweep-level rows.
    pub rows: Vec<Row>,
    pub failures: Vec<PointFailure>,
}

impl SweepOutcome {
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn values<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }
}

/// Runs every point on a pool of `jobs` threads (the global pool when
/// `None`); results are gathered by a single collector in sweep order.
pub fn run_sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> LabResult<SweepOutcome> {
    let pts = points(cfg);
    let pool = match jobs {
        Some(j) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(j.max(1))
                .build()
                .map_err(|e| LabError::Experiment(format!("cannot build worker pool: {e}")))?,
        ),
        None => None,
    };
    let (tx, rx) = mpsc::channel();
    let work = || {
        pts.par_iter().enumerate().for_each_with(tx, |tx, (i, p)| {
            let _ = tx.send((i, run_point(cfg, p)));
        })
    };
    match &pool {
        Some(pool) => pool.install(work),
        None => work(),
    }
    let mut slots: Vec<Option<LabResult<Vec<Row>>>> = (0..pts.len()).map(|_| None).collect();
    for (i, r) in rx {
        slots[i] = Some(r);
    }
    let mut out = SweepOutcome::default();
    for (p, slot) in pts.iter().zip(slots) {
        match slot.expect("every point reports") {
            Ok(rows) => out.rows.extend(rows),
            Err(e) => out.failures.push(PointFailure { point: p.label(), error: e.to_string() }),
        }
    }
    let extra = summarise(cfg, &out.rows);
    out.rows.extend(extra);
    Ok(out)
}

/// Least-squares slope of `log y` against `log x` over positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Values of `quantity` for `seed` ordered by decreasing epsilon.
pub(crate) fn by_epsilon(rows: &[Row], quantity: &str, seed: u64) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.quantity == quantity && r.seed == Some(seed) && r.alpha.is_none())
        .filter_map(|r| r.epsilon.map(|e| (e, r.value)))
        .collect();
    v.sort_by(|a, b| b.0.total_cmp(&a.0));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(2)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }
}
