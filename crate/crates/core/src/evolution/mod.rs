//! Sphere-constrained wave map evolution on the torus.
//!
//! The equation `□φ = -φ ∂_αφ^† ∂^αφ` with `□ = Δ - ∂_t²` and metric
//! `diag(-1, 1, ..., 1)` is integrated in the second-order form
//!
//! ```text
//! ∂_t² φ = Δφ + (|∇φ|² - |∂_t φ|²) φ
//! ```
//!
//! by a kick-drift-kick leapfrog step followed by projection back onto the
//! constraint manifold `|φ| = 1`, `φ · ∂_t φ = 0`.

mod checkpoint;
mod initial;

pub use checkpoint::{read_trace, write_trace, TRACE_MAGIC, TRACE_VERSION};
pub use initial::{make_initial_data, random_band_field, InitialData, ProbeBand};

use crate::error::{arg, Error, Result};
use crate::norms::{lebesgue_norm, SpacetimeTrace};
use crate::par;
use crate::spectral::{Decomposition, Field, GridSpec};

/// Position, velocity and time of a sphere-valued state.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereState {
    pub t: f64,
    pub phi: Field,
    pub phidot: Field,
}

impl SphereState {
    pub fn new(t: f64, phi: Field, phidot: Field) -> Result<Self> {
        if phi.grid() != phidot.grid() || phi.components() != phidot.components() {
            return arg("position and velocity must share grid and component count");
        }
        if phi.components() < 2 {
            return arg("target dimension m must be at least 2");
        }
        Ok(Self { t, phi, phidot })
    }

    /// The constant map `e_1` at rest.
    pub fn constant(grid: GridSpec, m: usize) -> Self {
        let mut e1 = vec![0.0; m];
        e1[0] = 1.0;
        Self { t: 0.0, phi: Field::constant(grid, &e1), phidot: Field::zeros(grid, m) }
    }

    pub fn grid(&self) -> &GridSpec {
        self.phi.grid()
    }

    /// `max_x | |φ(x)|² - 1 |`
    pub fn sphere_defect(&self) -> f64 {
        let phi = &self.phi;
        par::max(phi.grid().len(), |p| {
            let n2: f64 = (0..phi.components()).map(|c| phi.at(c, p).powi(2)).sum();
            (n2 - 1.0).abs()
        })
    }

    /// `max_x |φ(x) · ∂_t φ(x)|`
    pub fn tangency_defect(&self) -> f64 {
        let (phi, v) = (&self.phi, &self.phidot);
        par::max(phi.grid().len(), |p| {
            (0..phi.components()).map(|c| phi.at(c, p) * v.at(c, p)).sum::<f64>().abs()
        })
    }

    /// Normalises `φ` pointwise and removes the normal part of `∂_t φ`.
    pub fn project(&self) -> SphereState {
        let phi = normalise(&self.phi);
        let phidot = tangential_part(&phi, &self.phidot);
        SphereState { t: self.t, phi, phidot }
    }
}

fn normalise(phi: &Field) -> Field {
    let m = phi.components();
    Field::from_points(*phi.grid(), m, |p, out| {
        let norm = phi.pointwise_norm(p);
        for (c, o) in out.iter_mut().enumerate() {
            *o = phi.at(c, p) / norm;
        }
    })
}

fn tangential_part(phi: &Field, v: &Field) -> Field {
    let m = phi.components();
    Field::from_points(*phi.grid(), m, |p, out| {
        let normal: f64 = (0..m).map(|c| phi.at(c, p) * v.at(c, p)).sum();
        for (c, o) in out.iter_mut().enumerate() {
            *o = v.at(c, p) - normal * phi.at(c, p);
        }
    })
}

/// `|∇φ|²` pointwise, summed over components and axes.
pub fn gradient_energy_density(grad: &[Field]) -> Field {
    let grid = *grad[0].grid();
    let m = grad[0].components();
    Field::from_points(grid, 1, |p, out| {
        out[0] = grad
            .iter()
            .map(|g| (0..m).map(|c| g.at(c, p).powi(2)).sum::<f64>())
            .sum();
    })
}

/// `∂_t² φ = Δφ + (|∇φ|² - |∂_t φ|²) φ`, with `Δ` and `∇` spectral.
pub fn acceleration(s: &SphereState) -> Field {
    let dec = Decomposition::new(&s.phi);
    let lap = dec.spectrum().laplacian().to_field();
    let grad = dec.gradient();
    let m = s.phi.components();
    let grad_sq = gradient_energy_density(&grad);
    let (phi, v) = (&s.phi, &s.phidot);
    Field::from_points(*phi.grid(), m, |p, out| {
        let vel_sq: f64 = (0..m).map(|c| v.at(c, p).powi(2)).sum();
        let factor = grad_sq.at(0, p) - vel_sq;
        for (c, o) in out.iter_mut().enumerate() {
            *o = lap.at(c, p) + factor * phi.at(c, p);
        }
    })
}

/// Whether the leapfrog step re-projects onto the constraint manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionMode {
    #[default]
    Project,
    /// Raw leapfrog; used to measure the constraint drift.
    Free,
}

pub const DEFAULT_CFL: f64 = 0.5;

/// Largest stable step `cfl · h / sqrt(n)`.
///
/// The spectral Laplacian reaches `|κ| = sqrt(n) N/2` at the lattice corner,
/// so the bound scales with `h / sqrt(n)` rather than `h`.
pub fn cfl_limit(grid: &GridSpec, cfl: f64) -> f64 {
    cfl * grid.spacing() / (grid.dim() as f64).sqrt()
}

/// Constraint defects of the raw leapfrog update, before projection.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepDiagnostics {
    pub sphere_defect: f64,
    pub tangency_defect: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    pub cfl: f64,
    pub mode: ProjectionMode,
}

impl Default for Integrator {
    fn default() -> Self {
        Self { cfl: DEFAULT_CFL, mode: ProjectionMode::Project }
    }
}

impl Integrator {
    /// One kick-drift-kick step.
    ///
    /// The velocity-dependent term `-|∂_t φ|² φ` is normal to the sphere, so
    /// after the tangential projection the closing kick needs only the
    /// position at the new time.
    pub fn step_with_diagnostics(&self, s: &SphereState, dt: f64) -> Result<(SphereState, StepDiagnostics)> {
        let limit = cfl_limit(s.grid(), self.cfl);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt, limit });
        }
        let a0 = acceleration(s);
        let v_half = s.phidot.axpy(0.5 * dt, &a0)?;
        let x1 = s.phi.axpy(dt, &v_half)?;
        let t1 = s.t + dt;
        let raw = SphereState { t: t1, phi: x1, phidot: v_half };
        let pre_sphere = raw.sphere_defect();
        let x1 = match self.mode {
            ProjectionMode::Project => normalise(&raw.phi),
            ProjectionMode::Free => raw.phi,
        };
        let mid = SphereState { t: t1, phi: x1, phidot: raw.phidot };
        let a1 = acceleration(&mid);
        let v1 = mid.phidot.axpy(0.5 * dt, &a1)?;
        let unprojected = SphereState { t: t1, phi: mid.phi, phidot: v1 };
        let diag = StepDiagnostics {
            sphere_defect: pre_sphere,
            tangency_defect: unprojected.tangency_defect(),
        };
        let next = match self.mode {
            ProjectionMode::Project => {
                let v = tangential_part(&unprojected.phi, &unprojected.phidot);
                SphereState { t: t1, phi: unprojected.phi, phidot: v }
            }
            ProjectionMode::Free => unprojected,
        };
        if !(next.phi.max_abs().is_finite() && next.phidot.max_abs().is_finite()) {
            return Err(Error::Divergence { t: t1 });
        }
        Ok((next, diag))
    }

    pub fn step(&self, s: &SphereState, dt: f64) -> Result<SphereState> {
        Ok(self.step_with_diagnostics(s, dt)?.0)
    }
}

/// One projected leapfrog step at the default CFL factor.
pub fn step(s: &SphereState, dt: f64) -> Result<SphereState> {
    Integrator::default().step(s, dt)
}

/// Energy `½ (‖∂_t φ‖²_{L²} + Σ_j ‖∂_j φ‖²_{L²})`.
pub fn energy(s: &SphereState) -> f64 {
    let grad = Decomposition::new(&s.phi).gradient();
    let l2 = |f: &Field| lebesgue_norm(f, 2.0).expect("r = 2 is valid").powi(2);
    0.5 * (l2(&s.phidot) + grad.iter().map(l2).sum::<f64>())
}

/// Solver configuration for a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: GridSpec,
    pub m: usize,
    pub final_time: f64,
    pub dt: f64,
    pub cfl: f64,
    pub initial: InitialData,
    pub projection: ProjectionMode,
}

impl SolverConfig {
    /// Defaults: CFL factor 0.5, `dt` at the CFL limit, projected steps.
    pub fn new(grid: GridSpec, m: usize, final_time: f64, initial: InitialData) -> Self {
        Self {
            grid,
            m,
            final_time,
            dt: cfl_limit(&grid, DEFAULT_CFL),
            cfl: DEFAULT_CFL,
            initial,
            projection: ProjectionMode::Project,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::Config(format!("target dimension m = {} must be >= 2", self.m)));
        }
        if !(self.final_time >= 0.0 && self.final_time.is_finite()) {
            return Err(Error::Config(format!("final time {} must be >= 0", self.final_time)));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::Config(format!("cfl factor {} must be positive", self.cfl)));
        }
        let limit = cfl_limit(&self.grid, self.cfl);
        if !(self.dt > 0.0) || self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: self.dt, limit });
        }
        self.initial.validate()
    }

    /// Number of steps and the step actually used, `final_time / steps`.
    pub fn schedule(&self) -> (usize, f64) {
        if self.final_time == 0.0 {
            return (0, self.dt);
        }
        let steps = (self.final_time / self.dt - 1e-9).ceil().max(1.0) as usize;
        (steps, self.final_time / steps as f64)
    }

    pub fn integrator(&self) -> Integrator {
        Integrator { cfl: self.cfl, mode: self.projection }
    }
}

/// Per-run constraint and energy bookkeeping.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolutionDiagnostics {
    pub steps: usize,
    pub dt: f64,
    /// Energy at every sampled time.
    pub energies: Vec<f64>,
    /// Largest constraint defects of raw steps before projection.
    pub max_pre_projection: StepDiagnostics,
    /// Largest constraint defects of sampled (projected) states.
    pub max_sampled_sphere_defect: f64,
    pub max_sampled_tangency_defect: f64,
}

impl EvolutionDiagnostics {
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = self.energies.first().copied().unwrap_or(0.0);
        let drift = self
            .energies
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max);
        if e0 > 0.0 {
            drift / e0
        } else {
            drift
        }
    }
}

/// Evolves from `initial` and samples every `sample_every` steps (the final
/// time is always sampled).
pub fn evolve_from(
    cfg: &SolverConfig,
    initial: SphereState,
    sample_every: usize,
) -> Result<(SpacetimeTrace, EvolutionDiagnostics)> {
    cfg.validate()?;
    if sample_every == 0 {
        return arg("sample_every must be >= 1");
    }
    let (steps, dt) = cfg.schedule();
    let integrator = cfg.integrator();
    let mut diag = EvolutionDiagnostics { steps, dt, ..Default::default() };
    let mut samples = Vec::new();
    let mut record = |s: &SphereState, diag: &mut EvolutionDiagnostics| {
        diag.energies.push(energy(s));
        diag.max_sampled_sphere_defect = diag.max_sampled_sphere_defect.max(s.sphere_defect());
        diag.max_sampled_tangency_defect = diag.max_sampled_tangency_defect.max(s.tangency_defect());
        samples.push((s.t, s.phi.clone(), s.phidot.clone()));
    };
    let t0 = initial.t;
    let mut state = initial;
    record(&state, &mut diag);
    for i in 1..=steps {
        let (mut next, d) = integrator.step_with_diagnostics(&state, dt)?;
        // Pin sample times to the lattice t0 + i dt.
        next.t = t0 + i as f64 * dt;
        diag.max_pre_projection.sphere_defect = diag.max_pre_projection.sphere_defect.max(d.sphere_defect);
        diag.max_pre_projection.tangency_defect =
            diag.max_pre_projection.tangency_defect.max(d.tangency_defect);
        state = next;
        if i % sample_every == 0 || i == steps {
            record(&state, &mut diag);
        }
    }
    Ok((SpacetimeTrace::from_samples(samples)?, diag))
}

pub fn evolve_with_diagnostics(
    cfg: &SolverConfig,
    sample_every: usize,
) -> Result<(SpacetimeTrace, EvolutionDiagnostics)> {
    cfg.validate()?;
    let initial = make_initial_data(cfg)?;
    evolve_from(cfg, initial, sample_every)
}

/// Trace of the run described by `cfg`, sampled every `sample_every` steps.
pub fn evolve(cfg: &SolverConfig, sample_every: usize) -> Result<SpacetimeTrace> {
    Ok(evolve_with_diagnostics(cfg, sample_every)?.0)
}

/// The great-circle solution `φ(t) = cos(ωt) e_1 + sin(ωt) e_2`, constant in space.
pub fn geodesic_state(grid: GridSpec, m: usize, omega: f64, t: f64) -> SphereState {
    let mut pos = vec![0.0; m];
    let mut vel = vec![0.0; m];
    let (s, c) = (omega * t).sin_cos();
    pos[0] = c;
    pos[1] = s;
    vel[0] = -omega * s;
    vel[1] = omega * c;
    SphereState { t, phi: Field::constant(grid, &pos), phidot: Field::constant(grid, &vel) }
}

/// `φ_λ(t, x) = φ(t/λ, x/λ)` for `λ = 2^j`.
///
/// Samples are kept and relabelled onto the torus of period `λ · period`,
/// times are multiplied by `λ` and velocities divided by it. Lattice index
/// `ξ` then carries physical wavenumber `κ/λ`, so `P_k φ_λ = (P_{k+j} φ)_λ`
/// and the `Ḣ^{n/2}` norm is unchanged.
pub fn rescale_trace(tr: &SpacetimeTrace, lambda: f64) -> Result<SpacetimeTrace> {
    let j = lambda.log2();
    if !(lambda > 0.0) || !lambda.is_finite() || (j - j.round()).abs() > 1e-12 {
        return arg(format!("scale factor {lambda} is not a power of two"));
    }
    let grid = tr.grid().dilated(lambda)?;
    SpacetimeTrace::new(
        tr.times().iter().map(|t| t * lambda).collect(),
        tr.positions().iter().map(|f| f.relabelled(grid)).collect(),
        tr.velocities().iter().map(|f| f.relabelled(grid).scale(1.0 / lambda)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_is_stationary() {
        let g = GridSpec::torus(2, 16).unwrap();
        let s = SphereState::constant(g, 3);
        assert_eq!(acceleration(&s).max_abs(), 0.0);
        let next = step(&s, 0.05).unwrap();
        assert_eq!(next.phi, s.phi);
        assert_eq!(next.phidot, s.phidot);
        assert_eq!(energy(&s), 0.0);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = GridSpec::torus(2, 16).unwrap();
        let s = SphereState::constant(g, 3);
        let limit = cfl_limit(&g, DEFAULT_CFL);
        assert!(matches!(step(&s, 1.5 * limit), Err(Error::Cfl { .. })));
        assert!(matches!(step(&s, 0.0), Err(Error::Cfl { .. })));
    }

    #[test]
    fn geodesic_acceleration_is_centripetal() {
        let g = GridSpec::torus(1, 8).unwrap();
        let s = geodesic_state(g, 3, 1.7, 0.4);
        let a = acceleration(&s);
        let expect = s.phi.scale(-1.7 * 1.7);
        assert!(a.max_abs_diff(&expect).unwrap() < 1e-13);
    }

    #[test]
    fn geodesic_energy_closed_form() {
        // Unit-volume torus: E = ω²/2.
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let s = geodesic_state(g, 2, 3.0, 0.2);
        assert!((energy(&s) - 4.5).abs() < 1e-12);
    }

    #[test]
    fn divergence_carries_failure_time() {
        let g = GridSpec::torus(1, 8).unwrap();
        let mut s = geodesic_state(g, 2, 1.0, 0.0);
        s.phidot = s.phidot.scale(1e300);
        s.phidot = s.phidot.scale(1e10);
        match step(&s, 0.01) {
            Err(Error::Divergence { t }) => assert!((t - 0.01).abs() < 1e-15),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rescale_rejects_non_dyadic_factor() {
        let g = GridSpec::torus(1, 8).unwrap();
        let s = SphereState::constant(g, 2);
        let tr = SpacetimeTrace::new(vec![0.0], vec![s.phi], vec![s.phidot]).unwrap();
        assert!(rescale_trace(&tr, 3.0).is_err());
        assert!(rescale_trace(&tr, 0.0).is_err());
        assert_eq!(rescale_trace(&tr, 1.0).unwrap(), tr);
        assert!(rescale_trace(&tr, 0.5).is_ok());
    }
}
