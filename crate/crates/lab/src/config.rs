//! JSON experiment configuration.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wavemap_core::evolution::{cfl_limit, InitialData, SolverConfig, DEFAULT_CFL};
use wavemap_core::renorm::BandOffsets;
use wavemap_core::spectral::GridSpec;

use crate::error::{LabError, LabResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    LpChecks,
    SolverConvergence,
    GaugeDefects,
    CommutatorSweep,
    EnvelopeStability,
    RenormCompare,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::LpChecks => "lp_checks",
            Self::SolverConvergence => "solver_convergence",
            Self::GaugeDefects => "gauge_defects",
            Self::CommutatorSweep => "commutator_sweep",
            Self::EnvelopeStability => "envelope_stability",
            Self::RenormCompare => "renorm_compare",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetsConfig {
    pub low: i32,
    pub high: i32,
    pub gap: i32,
}

impl From<OffsetsConfig> for BandOffsets {
    fn from(o: OffsetsConfig) -> Self {
        BandOffsets { low: o.low, high: o.high, gap: o.gap }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub level: i32,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    /// Defaults to `band + 2` (clipped to the grid), or `k_band - low` for
    /// the renormalization experiment.
    pub k_top: Option<i32>,
    /// Defaults to the grid's lowest level.
    pub k_bot: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommutatorConfig {
    #[serde(default = "default_pairs")]
    pub pairs: usize,
    #[serde(default = "default_commutator_level")]
    pub k: i32,
    /// Grid sizes compared; defaults to `[N, 2N]`.
    #[serde(default)]
    pub resolutions: Vec<usize>,
    /// `(p, q, r)`; defaults to `(n-1, 2(n-1)/(n-3), 2)`, which needs `n >= 4`.
    /// `null` entries mean infinity.
    #[serde(default)]
    pub exponents: Option<[Option<f64>; 3]>,
    /// Level of the smooth multiplier `f`.
    #[serde(default)]
    pub f_level: i32,
    /// Levels summed into `g`.
    #[serde(default = "default_g_levels")]
    pub g_levels: Vec<i32>,
}

impl Default for CommutatorConfig {
    fn default() -> Self {
        Self {
            pairs: default_pairs(),
            k: default_commutator_level(),
            resolutions: Vec::new(),
            exponents: None,
            f_level: 0,
            g_levels: default_g_levels(),
        }
    }
}

fn default_pairs() -> usize {
    100
}

fn default_commutator_level() -> i32 {
    1
}

fn default_g_levels() -> Vec<i32> {
    vec![0, 1]
}

fn default_period() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_m() -> usize {
    3
}

fn default_final_time() -> f64 {
    1.0
}

fn default_cfl() -> f64 {
    DEFAULT_CFL
}

fn default_band() -> i32 {
    1
}

fn default_epsilons() -> Vec<f64> {
    vec![0.1]
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_sigma() -> f64 {
    wavemap_core::norms::DEFAULT_SIGMA
}

fn default_one() -> usize {
    1
}

fn default_omega() -> f64 {
    1.0
}

fn default_k_band() -> i32 {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(default = "default_period")]
    pub period: f64,
    /// Target sphere `S^{m-1} ⊂ R^m`.
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_final_time")]
    pub final_time: f64,
    /// Step size; `null` means the CFL limit.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    /// Dyadic level of the initial perturbation.
    #[serde(default = "default_band")]
    pub band: i32,
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<f64>,
    /// Step sizes for the convergence study; empty means the CFL limit
    /// halved twice.
    #[serde(default)]
    pub dts: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_one")]
    pub sample_every: usize,
    /// Angular speed of the geodesic oracle.
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub gauge: GaugeConfig,
    /// Band analysed by the renormalization experiment.
    #[serde(default = "default_k_band")]
    pub k_band: i32,
    #[serde(default)]
    pub offsets: Option<OffsetsConfig>,
    #[serde(default)]
    pub commutator: CommutatorConfig,
    /// Output directory; excluded from the config hash.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

fn invalid(key: &str, msg: impl fmt::Display) -> LabError {
    LabError::Config { key: key.to_string(), message: msg.to_string() }
}

fn config_error(path: String, e: serde_json::Error) -> LabError {
    let msg = e.to_string();
    let root = path.is_empty() || path == ".";
    // Duplicate keys are reported against the enclosing object; name them.
    let key = extract_backticked(&msg)
        .filter(|k| msg.starts_with("duplicate field") && !path.ends_with(k.as_str()))
        .map(|k| if root { k } else { format!("{path}.{k}") })
        .unwrap_or_else(|| if root { "<root>".to_string() } else { path });
    LabError::Config { key, message: msg }
}

fn extract_backticked(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> LabResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> LabResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid("<file>", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.n, self.points, self.period).expect("validated grid")
    }

    pub fn band_offsets(&self) -> BandOffsets {
        self.offsets.map(Into::into).unwrap_or_default()
    }

    /// Solver configuration for one sweep point.
    pub fn solver(&self, grid: GridSpec, epsilon: f64, seed: u64) -> SolverConfig {
        let mut initial = InitialData::new(epsilon, self.band, seed);
        if let Some(p) = self.probe {
            initial = initial.with_probe(p.level, p.ratio);
        }
        let mut cfg = SolverConfig::new(grid, self.m, self.final_time, initial);
        cfg.cfl = self.cfl;
        cfg.dt = self.dt.unwrap_or_else(|| cfl_limit(&grid, self.cfl));
        cfg
    }

    /// Step sizes of the convergence study.
    pub fn convergence_dts(&self) -> Vec<f64> {
        if self.dts.is_empty() {
            let h = cfl_limit(&self.grid(), self.cfl);
            vec![h, h / 2.0, h / 4.0]
        } else {
            self.dts.clone()
        }
    }

    /// `(p, q, r)` of the commutator sweep with infinities resolved.
    pub fn commutator_exponents(&self) -> LabResult<(f64, f64, f64)> {
        let inf = |v: Option<f64>| v.unwrap_or(f64::INFINITY);
        match self.commutator.exponents {
            Some([p, q, r]) => Ok((inf(p), inf(q), inf(r))),
            None if self.n >= 4 => {
                let n = self.n as f64;
                Ok((n - 1.0, 2.0 * (n - 1.0) / (n - 3.0), 2.0))
            }
            None => Err(invalid("commutator.exponents", "required when n < 4")),
        }
    }

    pub fn commutator_resolutions(&self) -> Vec<usize> {
        if self.commutator.resolutions.is_empty() {
            vec![self.points, 2 * self.points]
        } else {
            self.commutator.resolutions.clone()
        }
    }

    pub fn validate(&self) -> LabResult<()> {
        GridSpec::new(self.n, self.points, self.period).map_err(|e| invalid("N", e))?;
        if !(2..=8).contains(&self.m) {
            return Err(invalid("m", format!("m = {} must lie in 2..=8", self.m)));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(invalid("final_time", "must be finite and >= 0"));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid("cfl", "must lie in (0, 1]"));
        }
        if let Some(dt) = self.dt {
            let limit = cfl_limit(&self.grid(), self.cfl);
            if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
                return Err(invalid("dt", format!("dt = {dt} must lie in (0, {limit}] (CFL limit)")));
            }
        }
        if self.epsilons.is_empty() {
            return Err(invalid("epsilons", "sweep axis must be nonempty"));
        }
        if let Some(e) = self.epsilons.iter().find(|e| !(**e >= 0.0 && **e < 0.5)) {
            return Err(invalid("epsilons", format!("epsilon = {e} must lie in [0, 1/2)")));
        }
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "sweep axis must be nonempty"));
        }
        if let Some(d) = self.dts.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(invalid("dts", format!("step size {d} must be positive")));
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return Err(invalid("sigma", format!("sigma = {} must lie in (0, 1/2)", self.sigma)));
        }
        if self.sample_every == 0 {
            return Err(invalid("sample_every", "must be >= 1"));
        }
        if !self.omega.is_finite() {
            return Err(invalid("omega", "must be finite"));
        }
        let range = self.grid().dyadic_range().map_err(|e| invalid("N", e))?;
        if self.band <= range.k_min || self.band > range.k_max {
            return Err(invalid(
                "band",
                format!("level {} outside {}..={}", self.band, range.k_min + 1, range.k_max),
            ));
        }
        if let Some(p) = self.probe {
            if p.level <= range.k_min || p.level > range.k_max {
                return Err(invalid("probe.level", format!("level {} outside the grid's bands", p.level)));
            }
            if !(p.ratio >= 0.0 && p.ratio.is_finite()) {
                return Err(invalid("probe.ratio", "must be finite and >= 0"));
            }
        }
        match self.experiment {
            Experiment::RenormCompare => {
                self.band_offsets()
                    .levels(&self.grid(), self.k_band)
                    .map_err(|e| invalid("offsets", e))?;
            }
            Experiment::CommutatorSweep => self.validate_commutator()?,
            _ => {}
        }
        Ok(())
    }

    fn validate_commutator(&self) -> LabResult<()> {
        let c = &self.commutator;
        if c.pairs == 0 {
            return Err(invalid("commutator.pairs", "must be >= 1"));
        }
        let (p, q, r) = self.commutator_exponents()?;
        let recip = |x: f64| if x.is_infinite() { 0.0 } else { 1.0 / x };
        if [p, q, r].iter().any(|e| !(*e >= 1.0)) || (recip(p) + recip(q) - recip(r)).abs() > 1e-12 {
            return Err(invalid("commutator.exponents", format!("({p}, {q}, {r}) is not a Hölder triple")));
        }
        for &res in &self.commutator_resolutions() {
            let g = GridSpec::new(self.n, res, self.period).map_err(|e| invalid("commutator.resolutions", e))?;
            let range = g.dyadic_range().map_err(|e| invalid("commutator.resolutions", e))?;
            for (key, k) in std::iter::once(("commutator.f_level", c.f_level))
                .chain(c.g_levels.iter().map(|&k| ("commutator.g_levels", k)))
                .chain(std::iter::once(("commutator.k", c.k)))
            {
                if k <= range.k_min || k > range.k_max {
                    return Err(invalid(key, format!("level {k} not resolved at N = {res}")));
                }
            }
        }
        if c.g_levels.is_empty() {
            return Err(invalid("commutator.g_levels", "must be nonempty"));
        }
        Ok(())
    }

    /// Canonical JSON: keys sorted, output directory excluded.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":64}"#).unwrap();
        assert_eq!(c.sigma, 0.25);
        assert_eq!(c.m, 3);
        assert_eq!(c.seeds, vec![0]);
        assert!(c.offsets.is_none());
    }

    #[test]
    fn sigma_outside_range_names_key() {
        let e = ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":64,"sigma":0.6}"#).unwrap_err();
        assert!(matches!(e, LabError::Config { ref key, .. } if key == "sigma"), "{e}");
    }

    #[test]
    fn duplicate_unknown_and_mistyped_keys_are_named() {
        let dup = ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":64,"n":3}"#).unwrap_err();
        assert!(matches!(dup, LabError::Config { ref key, .. } if key == "n"), "{dup}");
        let unknown = ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":64,"nn":3}"#).unwrap_err();
        assert!(matches!(unknown, LabError::Config { ref key, .. } if key == "nn"), "{unknown}");
        let typed = ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":"big"}"#).unwrap_err();
        assert!(matches!(typed, LabError::Config { ref key, .. } if key == "N"), "{typed}");
        let nested =
            ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":64,"gauge":{"k_top":"x"}}"#).unwrap_err();
        assert!(matches!(nested, LabError::Config { ref key, .. } if key == "gauge.k_top"), "{nested}");
        let bad = ExperimentConfig::from_json(r#"{"experiment":"nope","n":2,"N":64}"#).unwrap_err();
        assert!(matches!(bad, LabError::Config { ref key, .. } if key == "experiment"), "{bad}");
    }

    #[test]
    fn hash_input_ignores_key_order_and_output() {
        let a = ExperimentConfig::from_json(r#"{"experiment":"lp_checks","n":2,"N":64,"seeds":[1,2]}"#).unwrap();
        let b =
            ExperimentConfig::from_json(r#"{"seeds":[1,2],"out":"/tmp/x","N":64,"n":2,"experiment":"lp_checks"}"#)
                .unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json());
    }

    #[test]
    fn renorm_headroom_is_checked() {
        let e = ExperimentConfig::from_json(r#"{"experiment":"renorm_compare","n":2,"N":128,"band":0}"#).unwrap_err();
        assert!(matches!(e, LabError::Config { ref key, .. } if key == "offsets"), "{e}");
        let ok = r#"{"experiment":"renorm_compare","n":2,"N":128,"band":0,"offsets":{"low":4,"high":2,"gap":1}}"#;
        assert!(ExperimentConfig::from_json(ok).is_ok());
    }
}
