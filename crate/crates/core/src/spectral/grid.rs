use std::f64::consts::PI;

use crate::error::{arg, Result};

/// Uniform periodic grid on the torus `[0, period)^dim` with `points`
/// samples per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    points: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points: usize, period: f64) -> Result<Self> {
        if !(1..=6).contains(&dim) {
            return arg(format!("dimension {dim} outside 1..=6"));
        }
        if points < 4 || !points.is_power_of_two() {
            return arg(format!("points per axis {points} must be a power of two >= 4"));
        }
        if !(period.is_finite() && period > 0.0) {
            return arg(format!("period {period} must be positive"));
        }
        let grid = Self { dim, points, period };
        grid.dyadic_range()?;
        Ok(grid)
    }

    /// The `2π`-periodic torus, on which lattice frequencies are integers.
    pub fn torus(dim: usize, points: usize) -> Result<Self> {
        Self::new(dim, points, 2.0 * PI)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    /// Total number of grid points, `points^dim`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> f64 {
        self.period.powi(self.dim as i32)
    }

    /// Physical wavenumber of one lattice step, `2π / period`.
    pub fn wavenumber_unit(&self) -> f64 {
        2.0 * PI / self.period
    }

    /// Stride of `axis` in the flat (row-major, last axis fastest) layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dim - 1 - axis) as u32)
    }

    /// Index along `axis` of the flat point `flat`.
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.stride(axis)) % self.points
    }

    /// Signed lattice frequency of an FFT bin; the Nyquist bin maps to `-N/2`.
    pub fn signed_frequency(&self, bin: usize) -> i64 {
        let n = self.points as i64;
        let b = bin as i64;
        if b < n / 2 {
            b
        } else {
            b - n
        }
    }

    pub fn is_nyquist(&self, bin: usize) -> bool {
        bin == self.points / 2
    }

    /// Lattice frequency vector `ξ` of the flat spectral index.
    pub fn lattice_frequency(&self, flat: usize) -> Vec<i64> {
        (0..self.dim)
            .map(|a| self.signed_frequency(self.axis_index(flat, a)))
            .collect()
    }

    /// Physical wavenumber `κ_axis = ξ_axis · 2π/period`.
    pub fn wavenumber(&self, flat: usize, axis: usize) -> f64 {
        self.signed_frequency(self.axis_index(flat, axis)) as f64 * self.wavenumber_unit()
    }

    /// Euclidean norm `|κ|` of the physical wavenumber.
    pub fn wavenumber_norm(&self, flat: usize) -> f64 {
        let mut s = 0.0;
        let mut rest = flat;
        for _ in 0..self.dim {
            let bin = rest % self.points;
            rest /= self.points;
            let f = self.signed_frequency(bin) as f64;
            s += f * f;
        }
        s.sqrt() * self.wavenumber_unit()
    }

    /// Physical coordinates of a grid point.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        (0..self.dim)
            .map(|a| self.axis_index(flat, a) as f64 * h)
            .collect()
    }

    /// Flat index of a multi-index (components taken modulo `points`).
    pub fn flat_index(&self, idx: &[i64]) -> usize {
        let n = self.points as i64;
        idx.iter()
            .fold(0usize, |acc, &i| acc * self.points + i.rem_euclid(n) as usize)
    }

    /// Dyadic levels resolvable on this grid.
    pub fn dyadic_range(&self) -> Result<DyadicRange> {
        let unit = self.wavenumber_unit();
        // P_{<=k_min} keeps only the zero mode: 2^{k_min + 1} <= unit.
        let k_min = unit.log2().floor() as i32 - 1;
        // Nyquist: 2^{k_max + 1} <= (N/2) unit.
        let k_max = ((self.points / 2) as f64 * unit).log2().floor() as i32 - 1;
        DyadicRange::new(k_min, k_max)
    }

    /// Same samples relabelled on a torus `factor` times larger.
    pub fn dilated(&self, factor: f64) -> Result<Self> {
        Self::new(self.dim, self.points, self.period * factor)
    }
}

/// Usable Littlewood-Paley levels `k_min..=k_max`.
///
/// `P_{<=k_min}` retains only the mean; bands `k_min < k <= k_max` fit
/// under the Nyquist frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicRange {
    pub k_min: i32,
    pub k_max: i32,
}

impl DyadicRange {
    pub fn new(k_min: i32, k_max: i32) -> Result<Self> {
        if k_min >= k_max {
            return arg(format!("empty dyadic range [{k_min}, {k_max}]"));
        }
        Ok(Self { k_min, k_max })
    }

    pub fn contains(&self, k: i32) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    /// Band levels `k_min + 1 ..= k_max`.
    pub fn bands(&self) -> impl DoubleEndedIterator<Item = i32> + Clone {
        self.k_min + 1..=self.k_max
    }

    pub fn band_count(&self) -> usize {
        (self.k_max - self.k_min) as usize
    }
}
