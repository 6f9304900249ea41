//! Almost-orthogonality and approximate parallel transport of the frame.

use wavemap_core::evolution::evolve;
use wavemap_core::gauge::{box_matrix, transport_defect, GaugeHistory};

use super::{by_epsilon, loglog_slope, Point};
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::Row;

/// `(k_top, k_bot)` from the config, defaulting to two levels above the
/// data band and the grid floor.
pub fn frame_levels(cfg: &ExperimentConfig) -> LabResult<(i32, i32)> {
    let range = cfg.grid().dyadic_range()?;
    let k_top = cfg.gauge.k_top.unwrap_or((cfg.band + 2).min(range.k_max));
    let k_bot = cfg.gauge.k_bot.unwrap_or(range.k_min);
    Ok((k_top, k_bot))
}

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    let (eps, seed) = (p.epsilon.unwrap_or(0.0), p.seed.unwrap_or(0));
    let solver = cfg.solver(cfg.grid(), eps, seed);
    // Time derivatives of the frame need every step.
    let tr = evolve(&solver, 1)?;
    let (k_top, k_bot) = frame_levels(cfg)?;
    let hist = GaugeHistory::build(&tr, k_top, k_bot)?;
    let at = |name: &str, v: f64| Row::new(name, v).k(k_top).epsilon(eps).seed(seed);
    let mut rows = vec![
        at("orth_defect", hist.max_orthogonality_defect()),
        at("orth_defect_initial", hist.orthogonality_defects[0]),
        at("min_det", hist.min_det),
    ];
    for a in transport_defect(&hist, &tr)? {
        let alpha = a.alpha;
        rows.push(at(&format!("transport_defect_alpha{alpha}"), a.defect_l1_linf).alpha(alpha));
        rows.push(at(&format!("connection_transport_alpha{alpha}"), a.connection_l1_linf).alpha(alpha));
        rows.push(at("dU_L2Linf", a.du_l2_linf).alpha(alpha));
        rows.push(at("dU_LinfLinf", a.du_linf_linf).alpha(alpha));
    }
    if cfg.n >= 2 && tr.len() >= 3 {
        rows.push(at("boxU_L2Ln1", box_matrix(&hist)?.l2_ln1()?));
    }
    Ok(rows)
}

/// Log-log slope of the orthogonality defect against epsilon, per seed.
pub fn summarise(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let pts = by_epsilon(rows, "orth_defect", seed);
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        if let Some(s) = loglog_slope(&xs, &ys) {
            out.push(Row::new("orth_defect_slope", s).seed(seed));
        }
    }
    out
}
