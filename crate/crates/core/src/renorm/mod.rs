//! Linearisation and renormalisation experiments on a band `ψ = P_k φ`.
//!
//! With the analysed band `k` playing the role of unit frequency, the
//! smoothed map is `φ̃ = P_{<=k-lo} φ` and the intermediate projection is
//! `P_{k-lo < · < k+hi}`. The nonlinearity `φ ∂_αφ^† ∂^αφ` is split into
//! seven pieces by the dyadic levels of its three factors; all but the two
//! low-high pieces are expected to be small after projecting to band `k`.

mod commutator;
mod compare;
mod stability;

pub use commutator::{commutator_defect, CommutatorOutcome};
pub use compare::{renormalize_and_compare, tangent_orthogonality, RenormReport, TangentReport};
pub use stability::{envelope_stability, EnvelopeStability};

use crate::error::{arg, Error, Result};
use crate::norms::{lebesgue_norm, time_norm, SpacetimeTrace};
use crate::spectral::{Decomposition, DyadicRange, Field, GridSpec, Spectrum};

/// Level offsets around the analysed band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandOffsets {
    /// `φ̃ = P_{<=k-low} φ`
    pub low: i32,
    /// High-high pieces start at `max(k2, k3) >= k + high`.
    pub high: i32,
    /// Matched versus mismatched high-high pairs: `|k2 - k3| <= gap`.
    pub gap: i32,
}

impl Default for BandOffsets {
    fn default() -> Self {
        Self { low: 10, high: 10, gap: 5 }
    }
}

impl BandOffsets {
    /// Offsets below the default separation shrink the frequency gaps the
    /// split relies on.
    pub fn is_reduced(&self) -> bool {
        *self != Self::default()
    }

    /// Resolves the offsets for band `k_band` on `grid`.
    pub fn levels(&self, grid: &GridSpec, k_band: i32) -> Result<BandLevels> {
        if self.low < 2 || self.high < 2 || self.gap < 0 {
            return Err(Error::Config(format!(
                "band offsets low = {}, high = {} must be >= 2 and gap = {} >= 0",
                self.low, self.high, self.gap
            )));
        }
        let range = grid.dyadic_range()?;
        let low = k_band - self.low;
        let high = k_band + self.high;
        if k_band <= range.k_min || low < range.k_min || high - 1 > range.k_max {
            return Err(Error::Config(format!(
                "band {k_band} with offsets (-{}, +{}) needs levels {low}..{} but the grid resolves {}..{}; \
                 use a larger grid or smaller offsets",
                self.low,
                self.high,
                high - 1,
                range.k_min,
                range.k_max
            )));
        }
        Ok(BandLevels { range, band: k_band, low, high, gap: self.gap })
    }
}

/// Absolute levels used by the split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandLevels {
    pub range: DyadicRange,
    pub band: i32,
    /// `φ̃ = P_{<=low} φ`; also the gauge threshold.
    pub low: i32,
    /// First level of the high-high region.
    pub high: i32,
    pub gap: i32,
}

/// `[∂_t f, ∂_1 f, ..., ∂_n f]` from the spectrum of `f` and its time derivative.
pub(crate) fn spacetime_derivatives(spec: &Spectrum, time: Field) -> Vec<Field> {
    let mut out = vec![time];
    out.extend((0..spec.grid().dim()).map(|a| spec.derivative(a).to_field()));
    out
}

/// `∂_α a^† ∂^α b = -∂_t a · ∂_t b + Σ_j ∂_j a · ∂_j b`, pointwise.
pub(crate) fn contraction(a: &[Field], b: &[Field]) -> Field {
    let grid = *a[0].grid();
    let m = a[0].components();
    Field::from_points(grid, 1, |p, out| {
        let mut s = 0.0;
        for (alpha, (x, y)) in a.iter().zip(b).enumerate() {
            let d: f64 = (0..m).map(|c| x.at(c, p) * y.at(c, p)).sum();
            s += if alpha == 0 { -d } else { d };
        }
        out[0] = s;
    })
}

/// `φ (∂_αφ^† ∂^αφ) = φ (|∇φ|² - |∂_t φ|²)` for one slice.
pub fn nonlinearity_slice(phi: &Field, phidot: &Field) -> Field {
    let d = spacetime_derivatives(&phi.spectrum(), phidot.clone());
    phi.mul_scalar_field(&contraction(&d, &d)).expect("scalar field on same grid")
}

pub fn nonlinearity(tr: &SpacetimeTrace) -> Vec<Field> {
    tr.positions()
        .iter()
        .zip(tr.velocities())
        .map(|(p, v)| nonlinearity_slice(p, v))
        .collect()
}

/// Names of the seven pieces in order.
pub const PIECE_NAMES: [&str; 7] = [
    "high_high_matched",
    "high_high_mismatched",
    "medium_high_first",
    "all_low",
    "medium_medium",
    "low_high",
    "high_low",
];

/// The seven pieces of one slice.
#[derive(Debug, Clone, PartialEq)]
pub struct SlicePieces {
    pub pieces: [Field; 7],
    /// `max |N - Σ pieces|`
    pub partition_residual: f64,
    /// `P_k N`
    pub projected_total: Field,
    /// `P_k` of each piece.
    pub projected: [Field; 7],
    /// `2 φ̃ ∂_αφ̃^† ∂^αψ`
    pub main: Field,
    /// `2 (P_k(R Ψ) - R P_k Ψ)` with `R = φ̃ ∂_αφ̃^†`, `Ψ = ∂^α P_mid φ`.
    pub commutator: Field,
    /// `max |P_k N - Σ_{i<=5} P_k piece_i - main - commutator|`
    pub bookkeeping_residual: f64,
}

/// Level label of each piece in the partition: the mean part, each band,
/// and the part above the top band.
fn level_pieces(dec: &Decomposition, vel: &Decomposition, range: DyadicRange) -> Result<Vec<(i32, Vec<Field>)>> {
    let mut out = Vec::new();
    let base = dec.spectrum().leq(range.k_min)?;
    out.push((range.k_min, spacetime_derivatives(&base, vel.leq(range.k_min)?)));
    for k in range.bands() {
        let s = dec.spectrum().band(k)?;
        out.push((k, spacetime_derivatives(&s, vel.band(k)?)));
    }
    let top = dec.spectrum().above(range.k_max)?;
    out.push((range.k_max + 1, spacetime_derivatives(&top, vel.above(range.k_max)?)));
    Ok(out)
}

fn sum_fields(fields: impl IntoIterator<Item = Field>, grid: GridSpec, comps: usize) -> Field {
    fields
        .into_iter()
        .fold(Field::zeros(grid, comps), |acc, f| acc.add(&f).expect("same shape"))
}

pub fn decompose_slice(phi: &Field, phidot: &Field, lv: &BandLevels) -> Result<SlicePieces> {
    let grid = *phi.grid();
    let dec = Decomposition::new(phi);
    let vel = Decomposition::new(phidot);
    let levels = level_pieces(&dec, &vel, lv.range)?;

    // Pairs with max(k2, k3) >= high, split by |k2 - k3| <= gap; the inner
    // sum over k3 is taken before contracting.
    let zero = || vec![Field::zeros(grid, phi.components()); grid.dim() + 1];
    let (mut matched, mut mismatched) = (Vec::new(), Vec::new());
    for (k2, d2) in &levels {
        let (mut near, mut far) = (zero(), zero());
        for (k3, d3) in &levels {
            if (*k2).max(*k3) < lv.high {
                continue;
            }
            let acc = if (k2 - k3).abs() <= lv.gap { &mut near } else { &mut far };
            for (a, d) in acc.iter_mut().zip(d3) {
                *a = a.add(d)?;
            }
        }
        matched.push(contraction(d2, &near));
        mismatched.push(contraction(d2, &far));
    }
    let dec1 = phi.mul_scalar_field(&sum_fields(matched, grid, 1))?;
    let dec2 = phi.mul_scalar_field(&sum_fields(mismatched, grid, 1))?;

    let below_high = spacetime_derivatives(&dec.spectrum().leq(lv.high - 1)?, vel.leq(lv.high - 1)?);
    let dec3 = dec.above(lv.low)?.mul_scalar_field(&contraction(&below_high, &below_high))?;

    let low_spec = dec.spectrum().leq(lv.low)?;
    let tilde = low_spec.to_field();
    let d_low = spacetime_derivatives(&low_spec, vel.leq(lv.low)?);
    let mid_spec = dec.spectrum().range(lv.low + 1, lv.high - 1)?;
    let d_mid = spacetime_derivatives(&mid_spec, vel.range(lv.low + 1, lv.high - 1)?);
    let dec4 = tilde.mul_scalar_field(&contraction(&d_low, &d_low))?;
    let dec5 = tilde.mul_scalar_field(&contraction(&d_mid, &d_mid))?;
    let dec6 = tilde.mul_scalar_field(&contraction(&d_low, &d_mid))?;
    let dec7 = tilde.mul_scalar_field(&contraction(&d_mid, &d_low))?;
    let pieces = [dec1, dec2, dec3, dec4, dec5, dec6, dec7];

    let full = nonlinearity_slice(phi, phidot);
    let partition_residual = full
        .max_abs_diff(&sum_fields(pieces.iter().cloned(), grid, phi.components()))?;

    let project = |f: &Field| Decomposition::new(f).band(lv.band);
    let projected_total = project(&full)?;
    let projected: [Field; 7] = {
        let v = pieces.iter().map(project).collect::<Result<Vec<_>>>()?;
        v.try_into().expect("seven pieces")
    };

    let psi_spec = dec.spectrum().band(lv.band)?;
    let d_psi = spacetime_derivatives(&psi_spec, vel.band(lv.band)?);
    let main = tilde.mul_scalar_field(&contraction(&d_low, &d_psi))?.scale(2.0);
    let d_mid_projected: Vec<Field> = d_mid.iter().map(project).collect::<Result<_>>()?;
    let r_projected = tilde.mul_scalar_field(&contraction(&d_low, &d_mid_projected))?;
    let commutator = projected[5].sub(&r_projected)?.scale(2.0);

    let closed = sum_fields(projected[..5].iter().cloned(), grid, phi.components())
        .add(&main)?
        .add(&commutator)?;
    let bookkeeping_residual = projected_total.max_abs_diff(&closed)?;
    Ok(SlicePieces { pieces, partition_residual, projected_total, projected, main, commutator, bookkeeping_residual })
}

/// `L¹_t L²_x` sizes of the projected pieces over a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityDecomposition {
    pub levels: BandLevels,
    /// `‖P_k piece_i‖_{L¹_t L²_x}` in [`PIECE_NAMES`] order.
    pub piece_norms: [f64; 7],
    pub total_norm: f64,
    pub main_norm: f64,
    pub commutator_norm: f64,
    /// Largest partition residual over slices, before projection.
    pub partition_residual: f64,
    /// Largest bookkeeping residual over slices, after projection.
    pub bookkeeping_residual: f64,
}

impl NonlinearityDecomposition {
    /// `‖P_k(piece_6 + piece_7)‖` relative to the sum of the other projected pieces.
    pub fn low_high_dominance(&self) -> f64 {
        let others: f64 = self.piece_norms[..5].iter().sum();
        let low_high = self.piece_norms[5] + self.piece_norms[6];
        if others > 0.0 {
            low_high / others
        } else {
            f64::INFINITY
        }
    }
}

/// `L²_x` norm per slice, then `L¹_t` (a single sample reports its `L²_x` norm).
pub(crate) fn l1_l2(times: &[f64], slices: &[f64]) -> Result<f64> {
    if times.len() == 1 {
        return Ok(slices[0]);
    }
    time_norm(times, slices, 1.0)
}

pub(crate) fn l2(f: &Field) -> f64 {
    lebesgue_norm(f, 2.0).expect("r = 2 is valid")
}

pub fn decompose_nonlinearity(
    tr: &SpacetimeTrace,
    k_band: i32,
    offsets: BandOffsets,
) -> Result<NonlinearityDecomposition> {
    let levels = offsets.levels(tr.grid(), k_band)?;
    let mut per_piece: Vec<Vec<f64>> = (0..7).map(|_| Vec::with_capacity(tr.len())).collect();
    let (mut total, mut main, mut comm) = (Vec::new(), Vec::new(), Vec::new());
    let (mut partition, mut bookkeeping) = (0.0_f64, 0.0_f64);
    for (phi, v) in tr.positions().iter().zip(tr.velocities()) {
        let s = decompose_slice(phi, v, &levels)?;
        for (acc, f) in per_piece.iter_mut().zip(&s.projected) {
            acc.push(l2(f));
        }
        total.push(l2(&s.projected_total));
        main.push(l2(&s.main));
        comm.push(l2(&s.commutator));
        partition = partition.max(s.partition_residual);
        bookkeeping = bookkeeping.max(s.bookkeeping_residual);
    }
    let t = tr.times();
    let mut piece_norms = [0.0; 7];
    for (out, vals) in piece_norms.iter_mut().zip(&per_piece) {
        *out = l1_l2(t, vals)?;
    }
    Ok(NonlinearityDecomposition {
        levels,
        piece_norms,
        total_norm: l1_l2(t, &total)?,
        main_norm: l1_l2(t, &main)?,
        commutator_norm: l1_l2(t, &comm)?,
        partition_residual: partition,
        bookkeeping_residual: bookkeeping,
    })
}

/// `2 φ̃ ∂_αφ̃^† ∂^αψ` per slice, with `φ̃ = P_{<=k-low} φ` and `ψ = P_k φ`.
pub fn main_term(tr: &SpacetimeTrace, k_band: i32, offsets: BandOffsets) -> Result<Vec<Field>> {
    let lv = offsets.levels(tr.grid(), k_band)?;
    tr.positions()
        .iter()
        .zip(tr.velocities())
        .map(|(phi, v)| main_term_slice(phi, v, lv.low, k_band))
        .collect()
}

pub(crate) fn main_term_slice(phi: &Field, phidot: &Field, low: i32, k_band: i32) -> Result<Field> {
    let dec = Decomposition::new(phi);
    let vel = Decomposition::new(phidot);
    let low_spec = dec.spectrum().leq(low)?;
    let d_low = spacetime_derivatives(&low_spec, vel.leq(low)?);
    let d_psi = spacetime_derivatives(&dec.spectrum().band(k_band)?, vel.band(k_band)?);
    Ok(low_spec.to_field().mul_scalar_field(&contraction(&d_low, &d_psi))?.scale(2.0))
}

pub(crate) fn require_samples(tr: &SpacetimeTrace, min: usize) -> Result<f64> {
    if tr.len() < min {
        return arg(format!("need at least {min} time samples, got {}", tr.len()));
    }
    tr.uniform_step().ok_or_else(|| Error::Argument("trace must be uniformly sampled".into()))
}
