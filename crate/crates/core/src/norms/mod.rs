//! Sobolev, Lebesgue and mixed spacetime norms, `S_k` norms, and frequency
//! envelopes.

mod envelope;
mod report;
mod trace;

pub use envelope::{
    band_profile, envelope_from_data, envelope_from_profile, lies_underneath, validate_envelope, EnvelopeConstants,
    EnvelopeValidation, FrequencyEnvelope, UnderneathReport, DEFAULT_SIGMA,
};
pub use report::{NormRecord, NormReport};
pub use trace::{SpacetimeTrace, TraceComponent};

use crate::error::{arg, Result};
use crate::par;
use crate::spectral::{Field, GridSpec, Spectrum};

/// Homogeneous Sobolev norm `(vol · Σ_{ξ≠0} |κ|^{2s} |f̂(ξ)|²)^{1/2}`.
///
/// The zero mode is dropped, so constants have norm zero; the volume factor
/// makes `sobolev_norm(f, 0)` agree with `lebesgue_norm(f, 2)` for mean-zero
/// fields.
pub fn sobolev_norm(f: &Field, s: f64) -> f64 {
    sobolev_norm_of_spectrum(&f.spectrum(), s)
}

/// [`sobolev_norm`] of the field with spectrum `spec`.
pub fn sobolev_norm_of_spectrum(spec: &Spectrum, s: f64) -> f64 {
    let vol = spec.grid().volume();
    let e = spec.weighted_energy(|kappa| if kappa == 0.0 { 0.0 } else { kappa.powf(2.0 * s) });
    (vol * e).sqrt()
}

/// Discrete `L^r` norm of pointwise values on `grid`, weighted by cell volume.
pub fn lebesgue_of<F>(grid: &GridSpec, r: f64, value: F) -> Result<f64>
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    if r.is_nan() || r < 1.0 {
        return arg(format!("Lebesgue exponent r = {r} must lie in [1, inf]"));
    }
    let len = grid.len();
    if r.is_infinite() {
        return Ok(par::max(len, |p| value(p).abs()));
    }
    let s = par::sum(len, |p| value(p).abs().powf(r));
    Ok((s * grid.cell_volume()).powf(1.0 / r))
}

/// `L^r_x` norm of the pointwise Euclidean magnitude of `f`.
pub fn lebesgue_norm(f: &Field, r: f64) -> Result<f64> {
    lebesgue_of(f.grid(), r, |p| f.pointwise_norm(p))
}

/// `L^q` norm in time of per-sample values, by the trapezoid rule.
pub fn time_norm(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    if times.is_empty() || times.len() != values.len() {
        return arg("time norm needs matching, non-empty time and value samples");
    }
    if q.is_nan() || q < 1.0 {
        return arg(format!("time exponent q = {q} must lie in [1, inf]"));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    if times.len() < 2 {
        return arg("a finite time exponent needs at least two samples");
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].abs().powf(q) + v[1].abs().powf(q)))
        .sum();
    Ok(integral.powf(1.0 / q))
}

/// `L^q_t L^r_x` norm of the position or velocity slices of a trace.
pub fn mixed_norm(tr: &SpacetimeTrace, q: f64, r: f64, which: TraceComponent) -> Result<f64> {
    let spatial = tr
        .slices(which)
        .iter()
        .map(|f| lebesgue_norm(f, r))
        .collect::<Result<Vec<_>>>()?;
    time_norm(tr.times(), &spatial, q)
}

/// Exponent pair `(q, r)` for `L^q_t L^r_x`; infinity is `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissiblePair {
    pub q: f64,
    pub r: f64,
}

impl AdmissiblePair {
    pub const fn new(q: f64, r: f64) -> Self {
        Self { q, r }
    }

    /// The seven pairs consumed by the Strichartz estimates in dimension `n`:
    /// `(2, 2(n-1)/(n-3))`, `(2,4)`, `(2,n-1)`, `(2,∞)`, `(4,2(n-1))`,
    /// `(∞,∞)`, `(∞,2)`. All seven are admissible only for `n >= 5`.
    pub fn strichartz_set(n: usize) -> Vec<Self> {
        let nf = n as f64;
        let endpoint = if n > 3 { 2.0 * (nf - 1.0) / (nf - 3.0) } else { f64::INFINITY };
        let inf = f64::INFINITY;
        vec![
            Self::new(2.0, endpoint),
            Self::new(2.0, 4.0),
            Self::new(2.0, nf - 1.0),
            Self::new(2.0, inf),
            Self::new(4.0, 2.0 * (nf - 1.0)),
            Self::new(inf, inf),
            Self::new(inf, 2.0),
        ]
    }
}

fn recip(x: f64) -> f64 {
    if x.is_infinite() {
        0.0
    } else {
        1.0 / x
    }
}

/// `2 <= q, r <= ∞` and `1/q + (n-1)/(2r) <= (n-1)/4` (closed inequality).
pub fn is_admissible(q: f64, r: f64, n: usize) -> bool {
    if !(q >= 2.0 && r >= 2.0) {
        return false;
    }
    let half = (n as f64 - 1.0) / 2.0;
    // Tolerance absorbs rounding in exact-equality cases such as (2, 4) at n = 5.
    recip(q) + half * recip(r) <= half / 2.0 + 1e-12
}

/// `sup_{(q,r)} 2^{k/q + kn/r} (‖φ‖_{L^q L^r} + 2^{-k} ‖∂_t φ‖_{L^q L^r})`.
pub fn sk_norm(tr: &SpacetimeTrace, k: i32, pairs: &[AdmissiblePair]) -> Result<f64> {
    let n = tr.grid().dim();
    if let Some(p) = pairs.iter().find(|p| !is_admissible(p.q, p.r, n)) {
        return arg(format!("pair (q, r) = ({}, {}) is not admissible for n = {n}", p.q, p.r));
    }
    let kf = k as f64;
    let mut best = 0.0_f64;
    for p in pairs {
        let weight = 2f64.powf(kf * recip(p.q) + kf * n as f64 * recip(p.r));
        let pos = mixed_norm(tr, p.q, p.r, TraceComponent::Position)?;
        let vel = mixed_norm(tr, p.q, p.r, TraceComponent::Velocity)?;
        best = best.max(weight * (pos + 2f64.powi(-k) * vel));
    }
    Ok(best)
}
