//! Geodesic convergence and conservation of the projected leapfrog solver.

use wavemap_core::evolution::{evolve_from, geodesic_state, make_initial_data};

use super::Point;
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::Row;

/// Largest pointwise deviation from the great circle over every step.
pub fn geodesic_error(cfg: &ExperimentConfig, dt: f64) -> LabResult<f64> {
    let grid = cfg.grid();
    let solver = cfg.solver(grid, 0.0, 0).with_dt(dt);
    let start = geodesic_state(grid, cfg.m, cfg.omega, 0.0);
    let (tr, _) = evolve_from(&solver, start, 1)?;
    let mut worst = 0.0_f64;
    for (&t, phi) in tr.times().iter().zip(tr.positions()) {
        worst = worst.max(phi.max_abs_diff(&geodesic_state(grid, cfg.m, cfg.omega, t).phi)?);
    }
    Ok(worst)
}

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    let dts = cfg.convergence_dts();
    let mut rows = Vec::new();
    if p.geodesic {
        let errs = dts.iter().map(|&dt| geodesic_error(cfg, dt)).collect::<LabResult<Vec<_>>>()?;
        for (dt, e) in dts.iter().zip(&errs) {
            rows.push(Row::new("geodesic_error", *e).dt(*dt));
        }
        for (w, dt) in errs.windows(2).zip(&dts[1..]) {
            let ratio = if w[1] > 0.0 { w[0] / w[1] } else { f64::INFINITY };
            rows.push(Row::new("geodesic_error_ratio", ratio).dt(*dt));
        }
        return Ok(rows);
    }
    let (eps, seed) = (p.epsilon.unwrap_or(0.0), p.seed.unwrap_or(0));
    let grid = cfg.grid();
    let base = cfg.solver(grid, eps, seed);
    // Build the data once; each step size restarts from it.
    let start = make_initial_data(&base)?;
    for &dt in &dts {
        let solver = base.clone().with_dt(dt);
        let (_, diag) = evolve_from(&solver, start.clone(), cfg.sample_every)?;
        let at = |name: &str, v: f64| Row::new(name, v).epsilon(eps).dt(diag.dt).seed(seed);
        rows.push(at("energy_drift", diag.relative_energy_drift()));
        rows.push(at("sphere_defect", diag.max_sampled_sphere_defect));
        rows.push(at("tangency_defect", diag.max_sampled_tangency_defect));
        rows.push(at("pre_projection_sphere_defect", diag.max_pre_projection.sphere_defect));
        rows.push(at("pre_projection_tangency_defect", diag.max_pre_projection.tangency_defect));
        rows.push(at("initial_energy", diag.energies.first().copied().unwrap_or(0.0)));
    }
    Ok(rows)
}

/// Drift ratio between consecutive step sizes of each sample.
pub fn summarise(cfg: &ExperimentConfig, rows: &[Row]) -> Vec<Row> {
    let mut out = Vec::new();
    for &eps in &cfg.epsilons {
        for &seed in &cfg.seeds {
            let drifts: Vec<&Row> = rows
                .iter()
                .filter(|r| r.quantity == "energy_drift" && r.epsilon == Some(eps) && r.seed == Some(seed))
                .collect();
            for w in drifts.windows(2) {
                let ratio = if w[1].value > 0.0 { w[0].value / w[1].value } else { f64::INFINITY };
                out.push(Row::new("energy_drift_ratio", ratio).epsilon(eps).dt(w[1].dt.unwrap_or(0.0)).seed(seed));
            }
        }
    }
    out
}
