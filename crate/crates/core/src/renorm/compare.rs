use super::{l1_l2, l2, main_term_slice, require_samples, spacetime_derivatives, BandLevels, BandOffsets};
use crate::error::Result;
use crate::gauge::{box_matrix, ConnectionField, GaugeHistory, MatrixField, DET_FLOOR};
use crate::norms::{envelope_from_data, time_norm, SpacetimeTrace, DEFAULT_SIGMA};
use crate::spectral::{laplacian, spatial_gradient, Decomposition, Field, GridSpec};

/// `φ̃^† ∂^α ψ` and the comparison quantity `(∂^α φ̃)^† ψ`, both in `L²_t L²_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentReport {
    pub orthogonality: Vec<f64>,
    pub comparison: Vec<f64>,
}

impl TangentReport {
    pub fn max_orthogonality(&self) -> f64 {
        self.orthogonality.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_comparison(&self) -> f64 {
        self.comparison.iter().copied().fold(0.0, f64::max)
    }
}

pub fn tangent_orthogonality(tr: &SpacetimeTrace, k_band: i32, offsets: BandOffsets) -> Result<TangentReport> {
    let lv = offsets.levels(tr.grid(), k_band)?;
    let n = tr.grid().dim();
    let mut orth = vec![Vec::with_capacity(tr.len()); n + 1];
    let mut comp = vec![Vec::with_capacity(tr.len()); n + 1];
    for (phi, v) in tr.positions().iter().zip(tr.velocities()) {
        let dec = Decomposition::new(phi);
        let vel = Decomposition::new(v);
        let low_spec = dec.spectrum().leq(lv.low)?;
        let tilde = low_spec.to_field();
        let d_low = spacetime_derivatives(&low_spec, vel.leq(lv.low)?);
        let psi_spec = dec.spectrum().band(k_band)?;
        let psi = psi_spec.to_field();
        let d_psi = spacetime_derivatives(&psi_spec, vel.band(k_band)?);
        for alpha in 0..=n {
            orth[alpha].push(l2(&tilde.dot(&d_psi[alpha])?));
            comp[alpha].push(l2(&d_low[alpha].dot(&psi)?));
        }
    }
    let t = tr.times();
    Ok(TangentReport {
        orthogonality: orth.iter().map(|s| time_norm(t, s, 2.0)).collect::<Result<_>>()?,
        comparison: comp.iter().map(|s| time_norm(t, s, 2.0)).collect::<Result<_>>()?,
    })
}

/// Before/after comparison for `w = U^{-1} ψ`. Norms are `L¹_t L²_x` over
/// the interior samples, where second time differences exist; they compare
/// quantities over the same finite window only.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormReport {
    pub grid: GridSpec,
    pub levels: BandLevels,
    pub k_bot: i32,
    /// Envelope value at the analysed band from the first slice.
    pub c_band: f64,
    pub box_psi: f64,
    /// `‖2 φ̃ ∂_αφ̃^† ∂^αψ‖`
    pub main_term: f64,
    /// `‖□ψ + 2 φ̃ ∂_αφ̃^† ∂^αψ‖`
    pub residual: f64,
    pub box_w: f64,
    /// `‖U^{-1}(□ψ - 2 A_α ∂^αψ)‖`
    pub renormalized_forcing: f64,
    /// `‖-2 U^{-1} (∂_αU - A_αU) ∂^αw‖`
    pub transport_group: f64,
    /// `‖2 U^{-1} A_α (∂^αU) w‖`
    pub connection_group: f64,
    /// `‖-U^{-1} (□U) w‖`
    pub box_u_group: f64,
    /// `max |U w - ψ|`
    pub round_trip: f64,
    /// `max |□w - forcing - groups|`, zero in the continuum limit.
    pub leibniz_residual: f64,
    pub min_det: f64,
}

impl RenormReport {
    /// `‖□w‖ / ‖□ψ‖`; zero when `□ψ` vanishes identically.
    pub fn improvement_ratio(&self) -> f64 {
        if self.box_psi > 0.0 {
            self.box_w / self.box_psi
        } else {
            0.0
        }
    }
}

/// `Σ_α η_α M_α v_α` with `η = (-1, 1, ..., 1)`.
fn contract_apply(mats: &[MatrixField], vecs: &[Field]) -> Result<Field> {
    let mut acc = Field::zeros(*vecs[0].grid(), vecs[0].components());
    for (alpha, (m, v)) in mats.iter().zip(vecs).enumerate() {
        let term = m.apply(v)?;
        acc = if alpha == 0 { acc.sub(&term)? } else { acc.add(&term)? };
    }
    Ok(acc)
}

fn box_of(prev: &Field, cur: &Field, next: &Field, dt: f64) -> Result<Field> {
    let dtt = next.sub(&cur.scale(2.0))?.add(prev)?.scale(1.0 / (dt * dt));
    laplacian(cur).sub(&dtt)
}

fn with_time(time: Field, f: &Field) -> Vec<Field> {
    let mut out = vec![time];
    out.extend(spatial_gradient(f));
    out
}

/// Builds the frame with threshold `k - low` and floor `k_bot` (default the
/// grid's lowest level) at every sample and compares `□ψ` against `□w`.
pub fn renormalize_and_compare(
    tr: &SpacetimeTrace,
    k_band: i32,
    offsets: BandOffsets,
    k_bot: Option<i32>,
) -> Result<RenormReport> {
    let dt = require_samples(tr, 3)?;
    let lv = offsets.levels(tr.grid(), k_band)?;
    let k_bot = k_bot.unwrap_or(lv.range.k_min);
    let hist = GaugeHistory::build(tr, lv.low, k_bot)?;
    let first_env = envelope_from_data(&tr.positions()[0], &tr.velocities()[0], DEFAULT_SIGMA, lv.range)?;
    let c_band = first_env.get(k_band).unwrap_or(0.0);

    let mut psi = Vec::with_capacity(tr.len());
    let mut w = Vec::with_capacity(tr.len());
    let mut inverses = Vec::with_capacity(tr.len());
    let mut round_trip = 0.0_f64;
    for (phi, u) in tr.positions().iter().zip(&hist.frames) {
        let p = Decomposition::new(phi).band(k_band)?;
        let inv = u.inverse(DET_FLOOR)?;
        let wi = inv.apply(&p)?;
        round_trip = round_trip.max(u.apply(&wi)?.max_abs_diff(&p)?);
        psi.push(p);
        w.push(wi);
        inverses.push(inv);
    }
    let du_dt = hist.time_derivative()?;
    let box_u = box_matrix(&hist)?;

    let interior = 1..tr.len() - 1;
    let times: Vec<f64> = tr.times()[interior.clone()].to_vec();
    let mut cols: [Vec<f64>; 8] = Default::default();
    let mut leibniz = 0.0_f64;
    for i in interior {
        let (phi, v) = (&tr.positions()[i], &tr.velocities()[i]);
        let u = &hist.frames[i];
        let inv = &inverses[i];
        let box_psi = box_of(&psi[i - 1], &psi[i], &psi[i + 1], dt)?;
        let box_w = box_of(&w[i - 1], &w[i], &w[i + 1], dt)?;
        let main = main_term_slice(phi, v, lv.low, k_band)?;
        let residual = box_psi.add(&main)?;

        let conn = ConnectionField::from_slice(phi, v, lv.low)?;
        let mut d_u = vec![du_dt[i].clone()];
        d_u.extend(u.gradient());
        let half = 0.5 / dt;
        let d_w = with_time(w[i + 1].sub(&w[i - 1])?.scale(half), &w[i]);
        let d_psi = with_time(psi[i + 1].sub(&psi[i - 1])?.scale(half), &psi[i]);

        let defects = d_u
            .iter()
            .zip(&conn.alphas)
            .map(|(d, a)| d.sub(&a.mul(u)?))
            .collect::<Result<Vec<_>>>()?;
        let g1 = inv.apply(&contract_apply(&defects, &d_w)?)?.scale(-2.0);
        let a_du = conn
            .alphas
            .iter()
            .zip(&d_u)
            .map(|(a, d)| a.mul(d))
            .collect::<Result<Vec<_>>>()?;
        let ws = vec![w[i].clone(); a_du.len()];
        let g2 = inv.apply(&contract_apply(&a_du, &ws)?)?.scale(2.0);
        let g3 = inv.apply(&box_u.values[i - 1].apply(&w[i])?)?.scale(-1.0);
        let forcing = inv.apply(&box_psi.sub(&contract_apply(&conn.alphas, &d_psi)?.scale(2.0))?)?;

        let predicted = forcing.add(&g1)?.add(&g2)?.add(&g3)?;
        leibniz = leibniz.max(box_w.max_abs_diff(&predicted)?);
        for (col, f) in cols.iter_mut().zip([&box_psi, &main, &residual, &box_w, &forcing, &g1, &g2, &g3]) {
            col.push(l2(f));
        }
    }
    let norm = |c: &[f64]| l1_l2(&times, c);
    Ok(RenormReport {
        grid: *tr.grid(),
        levels: lv,
        k_bot,
        c_band,
        box_psi: norm(&cols[0])?,
        main_term: norm(&cols[1])?,
        residual: norm(&cols[2])?,
        box_w: norm(&cols[3])?,
        renormalized_forcing: norm(&cols[4])?,
        transport_group: norm(&cols[5])?,
        connection_group: norm(&cols[6])?,
        box_u_group: norm(&cols[7])?,
        round_trip,
        leibniz_residual: leibniz,
        min_det: hist.min_det,
    })
}
