//! Growth of band norms against the initial frequency envelope.

use wavemap_core::evolution::evolve;
use wavemap_core::norms::band_profile;
use wavemap_core::renorm::envelope_stability;

use super::Point;
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::{format_number, Row};

/// Quantity name of the band norm sampled at time `t`.
pub fn band_norm_name(t: f64) -> String {
    format!("band_norm@t={}", format_number(t))
}

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    let (eps, seed) = (p.epsilon.unwrap_or(0.0), p.seed.unwrap_or(0));
    let solver = cfg.solver(cfg.grid(), eps, seed);
    let tr = evolve(&solver, cfg.sample_every)?;
    let stab = envelope_stability(&tr, cfg.sigma)?;
    let at = |name: &str, v: f64| Row::new(name, v).epsilon(eps).seed(seed);
    let mut rows = vec![
        // NaN marks a degenerate initial envelope.
        at("growth_factor", stab.growth.unwrap_or(f64::NAN)),
        at("envelope_degenerate", if stab.is_degenerate() { 1.0 } else { 0.0 }),
        at("envelope_epsilon", stab.initial.epsilon),
    ];
    if let Some((k, i)) = stab.worst {
        rows.push(at("worst_level", k as f64).k(k));
        rows.push(at("worst_time", tr.times()[i]).k(k));
    }
    for (k, c) in stab.initial.levels().zip(&stab.initial.values) {
        rows.push(at("envelope_initial", *c).k(k));
    }
    let range = tr.grid().dyadic_range()?;
    for ((t, phi), v) in tr.times().iter().zip(tr.positions()).zip(tr.velocities()) {
        let name = band_norm_name(*t);
        for (k, b) in range.bands().zip(band_profile(phi, v, range)?) {
            rows.push(at(&name, b).k(k));
        }
    }
    Ok(rows)
}
