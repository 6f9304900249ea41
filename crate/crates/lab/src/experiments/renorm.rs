//! Nonlinearity split and the before/after comparison of `w = U^{-1} ψ`.

use wavemap_core::evolution::evolve;
use wavemap_core::renorm::{decompose_nonlinearity, renormalize_and_compare, tangent_orthogonality, PIECE_NAMES};

use super::{by_epsilon, Point};
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::Row;

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    let (eps, seed) = (p.epsilon.unwrap_or(0.0), p.seed.unwrap_or(0));
    let solver = cfg.solver(cfg.grid(), eps, seed);
    // Second time differences need every step.
    let tr = evolve(&solver, 1)?;
    let offsets = cfg.band_offsets();
    let k = cfg.k_band;
    let at = |name: &str, v: f64| Row::new(name, v).k(k).epsilon(eps).seed(seed);

    let d = decompose_nonlinearity(&tr, k, offsets)?;
    let mut rows: Vec<Row> = PIECE_NAMES
        .iter()
        .zip(d.piece_norms)
        .map(|(name, v)| at(&format!("piece_{name}"), v))
        .collect();
    rows.extend([
        at("projected_nonlinearity", d.total_norm),
        at("main_term_split", d.main_norm),
        at("commutator_term", d.commutator_norm),
        at("partition_residual", d.partition_residual),
        at("bookkeeping_residual", d.bookkeeping_residual),
        at("low_high_dominance", d.low_high_dominance()),
    ]);

    let r = renormalize_and_compare(&tr, k, offsets, cfg.gauge.k_bot)?;
    rows.extend([
        at("box_psi", r.box_psi),
        at("main_term", r.main_term),
        at("box_psi_residual", r.residual),
        at("box_w", r.box_w),
        at("improvement_ratio", r.improvement_ratio()),
        at("renormalized_forcing", r.renormalized_forcing),
        at("transport_group", r.transport_group),
        at("connection_group", r.connection_group),
        at("box_u_group", r.box_u_group),
        at("round_trip", r.round_trip),
        at("leibniz_residual", r.leibniz_residual),
        at("min_det", r.min_det),
        at("c_band", r.c_band),
    ]);

    let t = tangent_orthogonality(&tr, k, offsets)?;
    for (alpha, (o, c)) in t.orthogonality.iter().zip(&t.comparison).enumerate() {
        rows.push(at("tangent_orthogonality", *o).qr(2.0, 2.0).alpha(alpha));
        rows.push(at("tangent_comparison", *c).qr(2.0, 2.0).alpha(alpha));
    }
    Ok(rows)
}

/// Whether the improvement ratio is non-increasing as epsilon decreases.
pub fn summarise(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for &seed in &cfg.seeds {
        let pts = by_epsilon(rows, "improvement_ratio", seed);
        if pts.len() < 2 {
            continue;
        }
        let monotone = pts.windows(2).all(|w| w[1].1 <= w[0].1);
        out.push(Row::new("improvement_ratio_monotone", if monotone { 1.0 } else { 0.0 }).seed(seed));
    }
    out
}
