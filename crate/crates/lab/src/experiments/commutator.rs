//! Realised constants of the commutator estimate on seeded random pairs.

use wavemap_core::evolution::random_band_field;
use wavemap_core::renorm::commutator_defect;
use wavemap_core::spectral::{Field, GridSpec};

use super::Point;
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::Row;

/// Seed of pair `i` drawn under sweep seed `s`.
pub fn pair_seed(s: u64, i: usize) -> u64 {
    (s << 20) | i as u64
}

pub fn points(cfg: &ExperimentConfig) -> Vec<Point> {
    let mut out = Vec::new();
    for res in cfg.commutator_resolutions() {
        for &s in &cfg.seeds {
            for i in 0..cfg.commutator.pairs {
                out.push(Point {
                    epsilon: None,
                    seed: Some(pair_seed(s, i)),
                    resolution: Some(res),
                    index: Some(i),
                    geodesic: false,
                });
            }
        }
    }
    out
}

pub fn ratio_name(resolution: usize) -> String {
    format!("commutator_ratio_N{resolution}")
}

pub fn max_name(resolution: usize) -> String {
    format!("commutator_ratio_max_N{resolution}")
}

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    let c = &cfg.commutator;
    let res = p.resolution.unwrap_or(cfg.points);
    let seed = p.seed.unwrap_or(0);
    let grid = GridSpec::new(cfg.n, res, cfg.period)?;
    let f = random_band_field(grid, 1, c.f_level, seed, 1)?;
    let mut g = Field::zeros(grid, cfg.m);
    for (j, &k) in c.g_levels.iter().enumerate() {
        g = g.add(&random_band_field(grid, cfg.m, k, seed, 2 + j as u64)?)?;
    }
    let (pe, qe, re) = cfg.commutator_exponents()?;
    let out = commutator_defect(&f, &g, c.k, pe, qe, re)?;
    // A vanishing denominator is reported as an infinite ratio.
    let ratio = out.ratio.unwrap_or(f64::INFINITY);
    Ok(vec![Row::new(ratio_name(res), ratio).k(c.k).qr(qe, re).seed(seed)])
}

/// Maximum per resolution and the spread of those maxima.
pub fn summarise(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    let mut maxima = Vec::new();
    for res in cfg.commutator_resolutions() {
        let name = ratio_name(res);
        let vals: Vec<f64> = rows.iter().filter(|r| r.quantity == name).map(|r| r.value).collect();
        if vals.is_empty() {
            continue;
        }
        let max = vals.iter().copied().fold(0.0, f64::max);
        out.push(Row::new(max_name(res), max).k(cfg.commutator.k));
        maxima.push(max);
    }
    if maxima.len() >= 2 {
        let hi = maxima.iter().copied().fold(0.0, f64::max);
        let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        out.push(Row::new("commutator_max_spread", spread).k(cfg.commutator.k));
    }
    out
}
