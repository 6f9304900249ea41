//! Exact identities of the projection and gauge machinery.

use wavemap_core::evolution::random_band_field;
use wavemap_core::gauge::{build_gauge, ConnectionField};
use wavemap_core::spectral::{Decomposition, Field, GridSpec};

use super::Point;
use crate::config::ExperimentConfig;
use crate::error::LabResult;
use crate::output::Row;

/// Every identity holds to this pointwise tolerance on unit-scale data.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

pub const IDENTITY_NAMES: [&str; 8] = [
    "lp_reconstruction",
    "band_support",
    "idempotence",
    "range_sum",
    "derivative_commutation",
    "projection_realness",
    "connection_antisymmetry",
    "gauge_telescoping",
];

/// Broadband unit-scale data: one seeded field per band, averaged.
fn broadband(grid: GridSpec, m: usize, seed: u64, stream: u64) -> LabResult<Field> {
    let range = grid.dyadic_range()?;
    let bands: Vec<i32> = range.bands().collect();
    let mut acc = Field::zeros(grid, m);
    for (i, &k) in bands.iter().enumerate() {
        let f = random_band_field(grid, m, k, seed, stream * 64 + i as u64)?;
        acc = acc.add(&f)?;
    }
    Ok(acc.scale(1.0 / bands.len() as f64))
}

/// `(name, residual)` for every identity in [`IDENTITY_NAMES`].
pub fn identity_suite(grid: GridSpec, m: usize, seed: u64) -> LabResult<Vec<(&'static str, f64)>> {
    let range = grid.dyadic_range()?;
    let f = broadband(grid, m, seed, 1)?;
    let dec = Decomposition::new(&f);
    let spec = dec.spectrum();

    let mut bands = Vec::new();
    let mut realness = 0.0_f64;
    let mut support = 0.0_f64;
    for k in range.bands() {
        let s = spec.band(k)?;
        let (lo, hi) = (2f64.powi(k - 1), 2f64.powi(k + 1));
        for c in 0..m {
            for flat in 0..grid.len() {
                let kappa = grid.wavenumber_norm(flat);
                if kappa < lo || kappa > hi {
                    support = support.max(s.coefficient(c, flat).norm());
                }
            }
        }
        let (field, residue) = s.to_field_with_residue();
        realness = realness.max(residue);
        bands.push((k, s, field));
    }

    let mut acc = dec.leq(range.k_min)?;
    for (_, _, b) in &bands {
        acc = acc.add(b)?;
    }
    let reconstruction = acc.max_abs_diff(&dec.leq(range.k_max)?)?;

    let mut range_sum = 0.0_f64;
    if range.band_count() >= 2 {
        let (k1, k2) = (range.k_min + 1, range.k_max);
        let sum = bands.iter().skip(1).fold(bands[0].2.clone(), |a, (_, _, b)| a.add(b).expect("same grid"));
        range_sum = dec.range(k1, k2)?.max_abs_diff(&sum)?;
    }

    let mut idempotence = 0.0_f64;
    for k in range.k_min..range.k_max {
        let inner = spec.leq(k)?;
        let (outer, _) = inner.leq(k + 1)?.to_field_with_residue();
        idempotence = idempotence.max(outer.max_abs_diff(&inner.to_field())?);
    }

    let mut commutation = 0.0_f64;
    for axis in 0..grid.dim() {
        let d = spec.derivative(axis);
        for (k, s, _) in &bands {
            let a = s.derivative(axis).to_field();
            let b = d.band(*k)?.to_field();
            commutation = commutation.max(a.max_abs_diff(&b)?);
        }
    }

    // A sphere-valued map and a tangent velocity for the gauge identities.
    let u = f.scale(0.5);
    let phi = Field::from_points(grid, m, |p, out| {
        let mut n2 = 0.0;
        for (c, o) in out.iter_mut().enumerate() {
            *o = u.at(c, p) + if c == 0 { 1.0 } else { 0.0 };
            n2 += *o * *o;
        }
        let n = n2.sqrt();
        out.iter_mut().for_each(|o| *o /= n);
    });
    let v = broadband(grid, m, seed, 2)?;
    let conn = ConnectionField::from_slice(&phi, &v, range.k_max)?;
    let telescoping = build_gauge(&phi, range.k_max, range.k_min)?.telescoping_residual();

    Ok(vec![
        ("lp_reconstruction", reconstruction),
        ("band_support", support),
        ("idempotence", idempotence),
        ("range_sum", range_sum),
        ("derivative_commutation", commutation),
        ("projection_realness", realness),
        ("connection_antisymmetry", conn.antisymmetry_defect()),
        ("gauge_telescoping", telescoping),
    ])
}

pub fn run_point(cfg: &ExperimentConfig, p: &Point) -> LabResult<Vec<Row>> {
    let seed = p.seed.unwrap_or(0);
    Ok(identity_suite(cfg.grid(), cfg.m, seed)?
        .into_iter()
        .map(|(name, v)| Row::new(name, v).seed(seed))
        .collect())
}

pub fn summarise(rows: &[Row]) -> Vec<Row> {
    let worst = rows.iter().map(|r| r.value).fold(0.0, f64::max);
    let passed = rows.iter().all(|r| r.value <= IDENTITY_TOLERANCE);
    vec![
        Row::new("max_identity_residual", worst),
        Row::new("identities_within_tolerance", if passed { 1.0 } else { 0.0 }),
    ]
}
