use crate::error::{arg, Result};
use crate::spectral::{Field, GridSpec};

/// Which half of the trace a norm is taken over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceComponent {
    Position,
    Velocity,
}

/// Time samples `(t_i, φ_i, ∂_t φ_i)` with strictly increasing times on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacetimeTrace {
    grid: GridSpec,
    times: Vec<f64>,
    positions: Vec<Field>,
    velocities: Vec<Field>,
}

impl SpacetimeTrace {
    pub fn new(times: Vec<f64>, positions: Vec<Field>, velocities: Vec<Field>) -> Result<Self> {
        if times.is_empty() {
            return arg("trace needs at least one sample");
        }
        if positions.len() != times.len() || velocities.len() != times.len() {
            return arg("trace times, positions and velocities differ in length");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return arg("trace times must be finite and strictly increasing");
        }
        let grid = *positions[0].grid();
        let m = positions[0].components();
        if positions
            .iter()
            .chain(&velocities)
            .any(|f| *f.grid() != grid || f.components() != m)
        {
            return arg("all trace slices must share one grid and component count");
        }
        Ok(Self { grid, times, positions, velocities })
    }

    /// Builds a trace from samples in any order.
    pub fn from_samples(mut samples: Vec<(f64, Field, Field)>) -> Result<Self> {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut times = Vec::with_capacity(samples.len());
        let mut positions = Vec::with_capacity(samples.len());
        let mut velocities = Vec::with_capacity(samples.len());
        for (t, p, v) in samples {
            times.push(t);
            positions.push(p);
            velocities.push(v);
        }
        Self::new(times, positions, velocities)
    }

    /// Applies `f` to every position slice and `g` to every velocity slice.
    pub fn map_slices(&self, f: impl Fn(&Field) -> Field, g: impl Fn(&Field) -> Field) -> Result<Self> {
        Self::new(
            self.times.clone(),
            self.positions.iter().map(&f).collect(),
            self.velocities.iter().map(&g).collect(),
        )
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.positions[0].components()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn positions(&self) -> &[Field] {
        &self.positions
    }

    pub fn velocities(&self) -> &[Field] {
        &self.velocities
    }

    pub fn slices(&self, which: TraceComponent) -> &[Field] {
        match which {
            TraceComponent::Position => &self.positions,
            TraceComponent::Velocity => &self.velocities,
        }
    }

    /// Uniform sampling interval, if the samples are equally spaced to 1e-9
    /// relative.
    pub fn uniform_step(&self) -> Option<f64> {
        if self.times.len() < 2 {
            return None;
        }
        let dt = (self.times[self.times.len() - 1] - self.times[0]) / (self.times.len() - 1) as f64;
        let uniform = self
            .times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs().max(1.0));
        uniform.then_some(dt)
    }
}
