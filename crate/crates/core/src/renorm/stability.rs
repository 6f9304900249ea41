use crate::error::Result;
use crate::norms::{band_profile, envelope_from_profile, FrequencyEnvelope, SpacetimeTrace};

/// Band norms along a trace measured against the envelope of the first slice.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeStability {
    pub initial: FrequencyEnvelope,
    /// Envelope of every slice.
    pub envelopes: Vec<FrequencyEnvelope>,
    /// `sup_{t,k}` of the band norm at `t` over `c_k(0)`; `None` when the
    /// initial envelope has a zero entry.
    pub growth: Option<f64>,
    /// Level and time index attaining the growth.
    pub worst: Option<(i32, usize)>,
}

impl EnvelopeStability {
    pub fn is_degenerate(&self) -> bool {
        self.growth.is_none()
    }
}

pub fn envelope_stability(tr: &SpacetimeTrace, sigma: f64) -> Result<EnvelopeStability> {
    let range = tr.grid().dyadic_range()?;
    let initial = envelope_from_profile(&band_profile(&tr.positions()[0], &tr.velocities()[0], range)?, sigma, range)?;
    let mut envelopes = Vec::with_capacity(tr.len());
    let mut growth = 0.0_f64;
    let mut worst = None;
    for (i, (phi, v)) in tr.positions().iter().zip(tr.velocities()).enumerate() {
        let profile = band_profile(phi, v, range)?;
        for (k, (b, c)) in initial.levels().zip(profile.iter().zip(&initial.values)) {
            if *c > 0.0 && b / c > growth {
                growth = b / c;
                worst = Some((k, i));
            }
        }
        envelopes.push(envelope_from_profile(&profile, sigma, range)?);
    }
    let growth = (!initial.degenerate).then_some(growth);
    let worst = worst.filter(|_| growth.is_some());
    Ok(EnvelopeStability { initial, envelopes, growth, worst })
}
