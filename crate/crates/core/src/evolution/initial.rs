use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{SolverConfig, SphereState};
use crate::error::{arg, Error, Result};
use crate::spectral::{project_band, Field, GridSpec};

/// Extra band added on top of the main one, with amplitude `ratio` relative to it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeBand {
    pub level: i32,
    pub ratio: f64,
}

/// Seeded perturbation of the constant map `e_1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub epsilon: f64,
    /// Dyadic level the perturbation is concentrated at.
    pub band: i32,
    pub seed: u64,
    pub probe: Option<ProbeBand>,
}

impl InitialData {
    pub fn new(epsilon: f64, band: i32, seed: u64) -> Self {
        Self { epsilon, band, seed, probe: None }
    }

    pub fn with_probe(mut self, level: i32, ratio: f64) -> Self {
        self.probe = Some(ProbeBand { level, ratio });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon < 0.5) {
            return Err(Error::Config(format!("epsilon = {} must lie in [0, 1/2)", self.epsilon)));
        }
        if let Some(p) = self.probe {
            if !(p.ratio >= 0.0 && p.ratio.is_finite()) {
                return Err(Error::Config(format!("probe ratio {} must be finite and >= 0", p.ratio)));
            }
        }
        Ok(())
    }
}

// Independent ChaCha streams per drawn field.
const STREAM_POSITION: u64 = 1;
const STREAM_VELOCITY: u64 = 2;
const STREAM_PROBE_POSITION: u64 = 3;
const STREAM_PROBE_VELOCITY: u64 = 4;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Gaussian white noise projected to band `level`, scaled so the largest
/// pointwise magnitude is 1.
pub fn random_band_field(grid: GridSpec, components: usize, level: i32, seed: u64, stream: u64) -> Result<Field> {
    let range = grid.dyadic_range()?;
    if level <= range.k_min || level > range.k_max {
        return Err(Error::Range { k: level, k_min: range.k_min + 1, k_max: range.k_max });
    }
    let mut rng = rng_for(seed, stream);
    let noise: Vec<f64> = (0..components * grid.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let banded = project_band(&Field::new(grid, components, noise)?, level)?;
    let peak = (0..grid.len()).map(|p| banded.pointwise_norm(p)).fold(0.0, f64::max);
    if peak == 0.0 {
        return arg(format!("band {level} holds no lattice frequencies"));
    }
    Ok(banded.scale(1.0 / peak))
}

/// Raw perturbation pair `(u, v)` before the amplitude and sphere projection.
///
/// `v` carries the weight `2^k · unit` of each band so that position and
/// velocity contribute comparably to the critical norms.
fn perturbation(cfg: &SolverConfig) -> Result<(Field, Field)> {
    let (grid, m, id) = (cfg.grid, cfg.m, cfg.initial);
    let unit = grid.wavenumber_unit();
    let speed = |k: i32| 2f64.powi(k) * unit;
    let mut u = random_band_field(grid, m, id.band, id.seed, STREAM_POSITION)?;
    let mut v = random_band_field(grid, m, id.band, id.seed, STREAM_VELOCITY)?.scale(speed(id.band));
    if let Some(p) = id.probe {
        let pu = random_band_field(grid, m, p.level, id.seed, STREAM_PROBE_POSITION)?;
        let pv = random_band_field(grid, m, p.level, id.seed, STREAM_PROBE_VELOCITY)?;
        u = u.axpy(p.ratio, &pu)?;
        v = v.axpy(p.ratio * speed(p.level), &pv)?;
    }
    let peak = (0..grid.len()).map(|i| u.pointwise_norm(i)).fold(0.0, f64::max);
    Ok((u.scale(1.0 / peak), v.scale(1.0 / peak)))
}

/// `φ = (e_1 + εu)/|e_1 + εu|`, `∂_t φ = εv - (φ · εv) φ`.
pub fn make_initial_data(cfg: &SolverConfig) -> Result<SphereState> {
    cfg.initial.validate()?;
    let (grid, m, eps) = (cfg.grid, cfg.m, cfg.initial.epsilon);
    if eps == 0.0 {
        return Ok(SphereState::constant(grid, m));
    }
    let (u, v) = perturbation(cfg)?;
    // |u| <= 1 and ε < 1/2 keep |e_1 + εu| >= 1/2.
    let phi = Field::from_points(grid, m, |p, out| {
        let mut norm2 = 0.0;
        for (c, o) in out.iter_mut().enumerate() {
            *o = eps * u.at(c, p) + if c == 0 { 1.0 } else { 0.0 };
            norm2 += *o * *o;
        }
        let norm = norm2.sqrt();
        out.iter_mut().for_each(|o| *o /= norm);
    });
    let phidot = Field::from_points(grid, m, |p, out| {
        let normal: f64 = (0..m).map(|c| phi.at(c, p) * eps * v.at(c, p)).sum();
        for (c, o) in out.iter_mut().enumerate() {
            *o = eps * v.at(c, p) - normal * phi.at(c, p);
        }
    });
    SphereState::new(0.0, phi, phidot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::SolverConfig;

    fn cfg(eps: f64) -> SolverConfig {
        let g = GridSpec::torus(2, 32).unwrap();
        SolverConfig::new(g, 3, 1.0, InitialData::new(eps, 2, 7))
    }

    #[test]
    fn zero_amplitude_is_e1() {
        let s = make_initial_data(&cfg(0.0)).unwrap();
        assert_eq!(s, SphereState::constant(GridSpec::torus(2, 32).unwrap(), 3));
    }

    #[test]
    fn constraints_and_determinism() {
        let a = make_initial_data(&cfg(0.2)).unwrap();
        let b = make_initial_data(&cfg(0.2)).unwrap();
        assert_eq!(a, b);
        assert!(a.sphere_defect() <= 1e-12);
        assert!(a.tangency_defect() <= 1e-12);
        assert!(a.phidot.max_abs() > 0.0);
    }

    #[test]
    fn amplitude_bound_enforced() {
        assert!(matches!(make_initial_data(&cfg(0.5)), Err(Error::Config(_))));
        assert!(make_initial_data(&cfg(-0.1)).is_err());
    }

    #[test]
    fn band_must_be_resolvable() {
        let mut c = cfg(0.1);
        c.initial.band = 9;
        assert!(matches!(make_initial_data(&c), Err(Error::Range { .. })));
    }
}
