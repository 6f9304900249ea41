use rustfft::num_complex::Complex64;

use super::fft;
use super::grid::GridSpec;
use crate::error::{arg, Result};
use crate::par;

/// Real `m`-component field sampled on a grid, stored component-major:
/// component `c` occupies `values[c * len .. (c + 1) * len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    components: usize,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, components: usize, values: Vec<f64>) -> Result<Self> {
        if components == 0 {
            return arg("field needs at least one component");
        }
        if values.len() != components * grid.len() {
            return arg(format!(
                "field value length {} != {} components x {} points",
                values.len(),
                components,
                grid.len()
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return arg(format!("non-finite field entry at index {i}"));
        }
        Ok(Self { grid, components, values })
    }

    /// Builds a field without the finiteness scan; callers guarantee length.
    pub(crate) fn from_raw(grid: GridSpec, components: usize, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), components * grid.len());
        Self { grid, components, values }
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        Self::from_raw(grid, components, vec![0.0; components * grid.len()])
    }

    pub fn constant(grid: GridSpec, value: &[f64]) -> Self {
        let len = grid.len();
        let values = value.iter().flat_map(|&v| std::iter::repeat_n(v, len)).collect();
        Self::from_raw(grid, value.len(), values)
    }

    /// Samples `f(x, out)` at every grid point.
    pub fn from_fn<F>(grid: GridSpec, components: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Send + Sync,
    {
        let values = par::pointwise(grid.len(), components, |p, out| f(&grid.coordinates(p), out));
        Self::from_raw(grid, components, values)
    }

    /// Evaluates `f(point, out)` at every flat point index.
    pub fn from_points<F>(grid: GridSpec, components: usize, f: F) -> Self
    where
        F: Fn(usize, &mut [f64]) + Send + Sync,
    {
        Self::from_raw(grid, components, par::pointwise(grid.len(), components, f))
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let len = self.grid.len();
        &self.values[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let len = self.grid.len();
        &mut self.values[c * len..(c + 1) * len]
    }

    #[inline]
    pub fn at(&self, c: usize, point: usize) -> f64 {
        self.values[c * self.grid.len() + point]
    }

    /// Vector value at one point.
    pub fn point(&self, point: usize) -> Vec<f64> {
        (0..self.components).map(|c| self.at(c, point)).collect()
    }

    pub fn point_into(&self, point: usize, out: &mut [f64]) {
        for (c, o) in out.iter_mut().enumerate().take(self.components) {
            *o = self.at(c, point);
        }
    }

    fn check_compatible(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid || self.components != other.components {
            return arg("fields live on different grids or have different component counts");
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Field> {
        self.check_compatible(other)?;
        let mut values = self.values.clone();
        par::for_each_chunk_mut(&mut values, 1 << 14, |b, chunk| {
            let base = b << 14;
            for (i, v) in chunk.iter_mut().enumerate() {
                *v = f(*v, other.values[base + i]);
            }
        });
        Ok(Self::from_raw(self.grid, self.components, values))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync) -> Field {
        let mut values = self.values.clone();
        par::for_each_chunk_mut(&mut values, 1 << 14, |_, chunk| {
            chunk.iter_mut().for_each(|v| *v = f(*v))
        });
        Self::from_raw(self.grid, self.components, values)
    }

    pub fn scale(&self, s: f64) -> Field {
        self.map(|v| v * s)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + s * b)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        par::max(self.values.len(), |i| self.values[i].abs())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Field) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(par::max(self.values.len(), |i| (self.values[i] - other.values[i]).abs()))
    }

    /// Pointwise Euclidean norm over components.
    pub fn pointwise_norm(&self, point: usize) -> f64 {
        (0..self.components)
            .map(|c| self.at(c, point).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Pointwise inner product `Σ_c a_c b_c` as a scalar field.
    pub fn dot(&self, other: &Field) -> Result<Field> {
        self.check_compatible(other)?;
        let m = self.components;
        Ok(Field::from_points(self.grid, 1, |p, out| {
            out[0] = (0..m).map(|c| self.at(c, p) * other.at(c, p)).sum();
        }))
    }

    /// Multiplies every component by the scalar field `s`.
    pub fn mul_scalar_field(&self, s: &Field) -> Result<Field> {
        if s.components != 1 || s.grid != self.grid {
            return arg("scalar multiplier must be a one-component field on the same grid");
        }
        let len = self.grid.len();
        let mut values = self.values.clone();
        par::for_each_chunk_mut(&mut values, len, |_, row| {
            row.iter_mut().zip(&s.values).for_each(|(v, w)| *v *= w)
        });
        Ok(Self::from_raw(self.grid, self.components, values))
    }

    /// Forward transform of every component.
    pub fn spectrum(&self) -> Spectrum {
        let len = self.grid.len();
        let mut data: Vec<Complex64> = self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for c in 0..self.components {
            fft::transform(&self.grid, &mut data[c * len..(c + 1) * len], false);
        }
        Spectrum { grid: self.grid, components: self.components, data }
    }

    /// Same samples on a different grid of equal size.
    pub(crate) fn relabelled(&self, grid: GridSpec) -> Field {
        debug_assert_eq!(grid.len(), self.grid.len());
        Self::from_raw(grid, self.components, self.values.clone())
    }
}

/// Fourier coefficients of a field, same component-major layout, with the
/// `1/N^n` normalisation on the forward transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    components: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, components: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != components * grid.len() {
            return arg("spectrum length does not match grid and component count");
        }
        Ok(Self { grid, components, data })
    }

    pub fn zeros(grid: GridSpec, components: usize) -> Self {
        Self { grid, components, data: vec![Complex64::default(); components * grid.len()] }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn coefficient(&self, c: usize, flat: usize) -> Complex64 {
        self.data[c * self.grid.len() + flat]
    }

    /// Multiplies each coefficient by `mult(flat_index)`.
    pub fn apply<F>(&self, mult: F) -> Spectrum
    where
        F: Fn(usize) -> Complex64 + Sync,
    {
        let len = self.grid.len();
        let mut data = self.data.clone();
        par::for_each_chunk_mut(&mut data, len, |_, row| {
            row.iter_mut().enumerate().for_each(|(k, z)| *z *= mult(k))
        });
        Spectrum { grid: self.grid, components: self.components, data }
    }

    /// Multiplies by a real radial symbol `mult(|κ|)`.
    pub fn apply_radial<F>(&self, mult: F) -> Spectrum
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let grid = self.grid;
        let symbol: Vec<f64> = par::map_indexed(grid.len(), |k| mult(grid.wavenumber_norm(k)));
        self.apply(|k| Complex64::new(symbol[k], 0.0))
    }

    pub fn add(&self, other: &Spectrum) -> Spectrum {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Spectrum { grid: self.grid, components: self.components, data }
    }

    /// Inverse transform, returning the real part and the largest imaginary
    /// residue.
    pub fn to_field_with_residue(&self) -> (Field, f64) {
        let len = self.grid.len();
        let mut data = self.data.clone();
        for c in 0..self.components {
            fft::transform(&self.grid, &mut data[c * len..(c + 1) * len], true);
        }
        let residue = par::max(data.len(), |i| data[i].im.abs());
        let values = data.iter().map(|z| z.re).collect();
        (Field::from_raw(self.grid, self.components, values), residue)
    }

    pub fn to_field(&self) -> Field {
        self.to_field_with_residue().0
    }

    /// Largest `|f̂(ξ) - conj f̂(-ξ)|`, zero for the spectrum of a real field.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let g = self.grid;
        let len = g.len();
        par::max(self.data.len(), |i| {
            let (c, k) = (i / len, i % len);
            let neg: Vec<i64> = g.lattice_frequency(k).iter().map(|v| -v).collect();
            let j = g.flat_index(&neg);
            (self.data[i] - self.data[c * len + j].conj()).norm()
        })
    }

    /// `Σ_ξ w(|κ|) |f̂(ξ)|²` summed over components.
    pub fn weighted_energy<F>(&self, weight: F) -> f64
    where
        F: Fn(f64) -> f64 + Sync,
    {
        let g = self.grid;
        let len = g.len();
        par::sum(self.data.len(), |i| weight(g.wavenumber_norm(i % len)) * self.data[i].norm_sqr())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_conjugate_symmetry() {
        let g = GridSpec::torus(2, 16).unwrap();
        let f = Field::from_fn(g, 2, |x, out| {
            out[0] = (x[0] + 2.0 * x[1]).sin() + 0.3;
            out[1] = (3.0 * x[0]).cos() * x[1].sin();
        });
        let s = f.spectrum();
        assert!(s.conjugate_symmetry_defect() < 1e-14);
        let (back, residue) = s.to_field_with_residue();
        assert!(residue < 1e-13);
        assert!(back.max_abs_diff(&f).unwrap() < 1e-13);
        // mean is the zero mode
        assert!((s.coefficient(0, 0).re - 0.3).abs() < 1e-14);
    }

    #[test]
    fn single_mode_coefficient() {
        let g = GridSpec::torus(1, 16).unwrap();
        let f = Field::from_fn(g, 1, |x, out| out[0] = (3.0 * x[0]).cos());
        let s = f.spectrum();
        assert!((s.coefficient(0, 3).re - 0.5).abs() < 1e-14);
        assert!((s.coefficient(0, 13).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = GridSpec::torus(1, 8).unwrap();
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(Field::new(g, 1, v).is_err());
        assert!(Field::new(g, 2, vec![0.0; 8]).is_err());
    }
}
