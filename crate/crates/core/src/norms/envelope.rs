use super::sobolev_norm_of_spectrum;
use crate::error::{arg, Result};
use crate::spectral::{DyadicRange, Field};

pub const DEFAULT_SIGMA: f64 = 0.25;

/// Realised constants for the `≲` in the envelope conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeConstants {
    /// `Σ c_k² <= (k_env ε)²`
    pub k_env: f64,
    /// `2^{-σ|k-k'|} c_{k'} <= k_loc c_k`
    pub k_loc: f64,
}

impl Default for EnvelopeConstants {
    fn default() -> Self {
        Self { k_env: 4.0, k_loc: 1.01 }
    }
}

/// Per-level envelope values `c_k` for `k = k_start, k_start + 1, ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEnvelope {
    pub sigma: f64,
    pub k_start: i32,
    pub values: Vec<f64>,
    pub epsilon: f64,
    /// Set when some `c_k` is zero, which the definition forbids.
    pub degenerate: bool,
}

impl FrequencyEnvelope {
    pub fn new(sigma: f64, k_start: i32, values: Vec<f64>, epsilon: f64) -> Result<Self> {
        check_sigma(sigma)?;
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return arg("envelope values must be finite and non-negative");
        }
        let degenerate = values.contains(&0.0);
        Ok(Self { sigma, k_start, values, epsilon, degenerate })
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.values.len()).map(move |i| self.k_start + i as i32)
    }

    pub fn get(&self, k: i32) -> Option<f64> {
        let i = k - self.k_start;
        (i >= 0).then(|| self.values.get(i as usize).copied()).flatten()
    }

    /// Value with the `1e-300` floor applied, for logs and ratios only.
    pub fn reporting_value(&self, k: i32) -> Option<f64> {
        self.get(k).map(|v| v.max(1e-300))
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 0.5) {
        return arg(format!("sigma = {sigma} must lie in (0, 1/2)"));
    }
    Ok(())
}

/// `‖P_k f‖_{Ḣ^{n/2}} + ‖P_k g‖_{Ḣ^{n/2-1}}` for every band of `range`.
pub fn band_profile(f: &Field, g: &Field, range: DyadicRange) -> Result<Vec<f64>> {
    let n = f.grid().dim() as f64;
    let sf = f.spectrum();
    let sg = g.spectrum();
    range
        .bands()
        .map(|k| {
            Ok(sobolev_norm_of_spectrum(&sf.band(k)?, n / 2.0)
                + sobolev_norm_of_spectrum(&sg.band(k)?, n / 2.0 - 1.0))
        })
        .collect()
}

/// `c_k = Σ_{k'} 2^{-σ|k-k'|} (‖P_{k'} f‖_{Ḣ^{n/2}} + ‖P_{k'} g‖_{Ḣ^{n/2-1}})`
/// over the bands of `range`; `epsilon` is set to the `l²` size of the
/// band profile.
pub fn envelope_from_data(f: &Field, g: &Field, sigma: f64, range: DyadicRange) -> Result<FrequencyEnvelope> {
    check_sigma(sigma)?;
    envelope_from_profile(&band_profile(f, g, range)?, sigma, range)
}

/// Envelope of a precomputed [`band_profile`] over the bands of `range`.
pub fn envelope_from_profile(profile: &[f64], sigma: f64, range: DyadicRange) -> Result<FrequencyEnvelope> {
    check_sigma(sigma)?;
    if profile.len() != range.band_count() {
        return arg("band profile length does not match the dyadic range");
    }
    let values: Vec<f64> = (0..profile.len())
        .map(|i| {
            profile
                .iter()
                .enumerate()
                .map(|(j, p)| 2f64.powf(-sigma * (i as f64 - j as f64).abs()) * p)
                .sum()
        })
        .collect();
    let epsilon = profile.iter().map(|p| p * p).sum::<f64>().sqrt();
    FrequencyEnvelope::new(sigma, range.k_min + 1, values, epsilon)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnderneathReport {
    pub holds: bool,
    /// `(k, c_k - band norm)`; negative margins are violations.
    pub margins: Vec<(i32, f64)>,
}

/// Whether `(f, g)` lies underneath `env` at every level the envelope covers.
pub fn lies_underneath(f: &Field, g: &Field, env: &FrequencyEnvelope) -> Result<UnderneathReport> {
    let k_end = env.k_start + env.values.len() as i32 - 1;
    let range = DyadicRange::new(env.k_start - 1, k_end)?;
    let profile = band_profile(f, g, range)?;
    let margins: Vec<(i32, f64)> = env
        .levels()
        .zip(env.values.iter().zip(&profile))
        .map(|(k, (c, p))| (k, c - p))
        .collect();
    let holds = margins.iter().all(|(_, m)| *m >= 0.0);
    Ok(UnderneathReport { holds, margins })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeValidation {
    pub l2_norm: f64,
    pub l2_bound: f64,
    pub l2_ok: bool,
    pub positive: bool,
    /// Largest `2^{-σ|k-k'|} c_{k'} / c_k` over all pairs (infinite when some
    /// `c_k` vanishes), and the pair attaining it.
    pub worst_local_ratio: f64,
    pub worst_pair: (i32, i32),
    pub local_ok: bool,
    pub valid: bool,
}

pub fn validate_envelope(env: &FrequencyEnvelope, consts: EnvelopeConstants) -> EnvelopeValidation {
    let l2_norm = env.l2_norm();
    let l2_bound = consts.k_env * env.epsilon;
    let l2_ok = l2_norm <= l2_bound;
    let positive = env.values.iter().all(|&v| v > 0.0);
    let mut worst = 0.0_f64;
    let mut worst_pair = (env.k_start, env.k_start);
    for (i, &ck) in env.values.iter().enumerate() {
        for (j, &ckp) in env.values.iter().enumerate() {
            let w = 2f64.powf(-env.sigma * (i as f64 - j as f64).abs()) * ckp;
            let ratio = if ck > 0.0 {
                w / ck
            } else if w > 0.0 || ckp == 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if ratio > worst {
                worst = ratio;
                worst_pair = (env.k_start + i as i32, env.k_start + j as i32);
            }
        }
    }
    let local_ok = positive && worst <= consts.k_loc;
    EnvelopeValidation {
        l2_norm,
        l2_bound,
        l2_ok,
        positive,
        worst_local_ratio: worst,
        worst_pair,
        local_ok,
        valid: l2_ok && local_ok,
    }
}
