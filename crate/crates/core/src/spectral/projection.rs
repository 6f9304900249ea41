//! Littlewood-Paley multipliers and spectral differentiation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;

use super::field::{Field, Spectrum};
use super::grid::GridSpec;
use crate::error::{arg, Error, Result};
use crate::par;

fn smooth_step_kernel(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth transition `h(t) = g(t) / (g(t) + g(1 - t))`, `g(t) = e^{-1/t}`:
/// 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    let a = smooth_step_kernel(t);
    let b = smooth_step_kernel(1.0 - t);
    a / (a + b)
}

/// Radial bump `m(s) = h(2 - s)`: 1 on `s <= 1`, 0 on `s >= 2`, smooth and
/// non-increasing between.
pub fn bump_symbol(s: f64) -> f64 {
    smooth_step(2.0 - s)
}

/// Symbol of `P_{<=k}` at wavenumber magnitude `kappa`.
pub fn leq_symbol(k: i32, kappa: f64) -> f64 {
    bump_symbol(kappa * 2f64.powi(-k))
}

/// Symbol of `P_k = P_{<=k} - P_{<=k-1}`.
pub fn band_symbol(k: i32, kappa: f64) -> f64 {
    leq_symbol(k, kappa) - leq_symbol(k - 1, kappa)
}

/// Symbol of `P_{k1 <= . <= k2} = P_{<=k2} - P_{<=k1-1}`.
pub fn range_symbol(k1: i32, k2: i32, kappa: f64) -> f64 {
    leq_symbol(k2, kappa) - leq_symbol(k1 - 1, kappa)
}

fn check_level(grid: &GridSpec, k: i32) -> Result<()> {
    let r = grid.dyadic_range()?;
    if k > r.k_max {
        return Err(Error::Range { k, k_min: r.k_min, k_max: r.k_max });
    }
    Ok(())
}

/// Multiplier tables already evaluated on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Symbol {
    Leq(i32),
    Band(i32),
    Range(i32, i32),
    Above(i32),
    Laplacian,
    Derivative(usize),
}

type TableKey = (usize, usize, u64, Symbol);

fn table(grid: &GridSpec, symbol: Symbol) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<Vec<f64>>>>> = OnceLock::new();
    let key = (grid.dim(), grid.points(), grid.period().to_bits(), symbol);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("symbol cache poisoned").get(&key) {
        return Arc::clone(t);
    }
    let g = *grid;
    let values = par::map_indexed(g.len(), |k| match symbol {
        Symbol::Derivative(axis) => {
            if g.is_nyquist(g.axis_index(k, axis)) {
                0.0
            } else {
                g.wavenumber(k, axis)
            }
        }
        _ => {
            let kappa = g.wavenumber_norm(k);
            match symbol {
                Symbol::Leq(j) => leq_symbol(j, kappa),
                Symbol::Band(j) => band_symbol(j, kappa),
                Symbol::Range(a, b) => range_symbol(a, b, kappa),
                Symbol::Above(j) => 1.0 - leq_symbol(j, kappa),
                Symbol::Laplacian => -kappa * kappa,
                Symbol::Derivative(_) => unreachable!(),
            }
        }
    });
    let t = Arc::new(values);
    cache.lock().expect("symbol cache poisoned").insert(key, Arc::clone(&t));
    t
}

impl Spectrum {
    fn apply_real_table(&self, symbol: Symbol) -> Spectrum {
        let t = table(self.grid(), symbol);
        self.apply(|k| Complex64::new(t[k], 0.0))
    }

    pub fn leq(&self, k: i32) -> Result<Spectrum> {
        check_level(self.grid(), k)?;
        Ok(self.apply_real_table(Symbol::Leq(k)))
    }

    pub fn band(&self, k: i32) -> Result<Spectrum> {
        check_level(self.grid(), k)?;
        Ok(self.apply_real_table(Symbol::Band(k)))
    }

    pub fn range(&self, k1: i32, k2: i32) -> Result<Spectrum> {
        if k1 > k2 {
            return arg(format!("projection range k1 = {k1} > k2 = {k2}"));
        }
        check_level(self.grid(), k2)?;
        Ok(self.apply_real_table(Symbol::Range(k1, k2)))
    }

    /// Complement `1 - P_{<=k}`.
    pub fn above(&self, k: i32) -> Result<Spectrum> {
        check_level(self.grid(), k)?;
        Ok(self.apply_real_table(Symbol::Above(k)))
    }

    /// Spectral `∂/∂x_axis`; the Nyquist bin of that axis is zeroed so that
    /// real fields stay real.
    pub fn derivative(&self, axis: usize) -> Spectrum {
        let t = table(self.grid(), Symbol::Derivative(axis));
        self.apply(|k| Complex64::new(0.0, t[k]))
    }

    pub fn laplacian(&self) -> Spectrum {
        self.apply_real_table(Symbol::Laplacian)
    }
}

pub fn project_leq(f: &Field, k: i32) -> Result<Field> {
    Ok(f.spectrum().leq(k)?.to_field())
}

pub fn project_band(f: &Field, k: i32) -> Result<Field> {
    Ok(f.spectrum().band(k)?.to_field())
}

pub fn project_range(f: &Field, k1: i32, k2: i32) -> Result<Field> {
    Ok(f.spectrum().range(k1, k2)?.to_field())
}

/// `∂_j f` for `j = 0..n`, computed spectrally.
pub fn spatial_gradient(f: &Field) -> Vec<Field> {
    let s = f.spectrum();
    (0..f.grid().dim()).map(|a| s.derivative(a).to_field()).collect()
}

pub fn laplacian(f: &Field) -> Field {
    f.spectrum().laplacian().to_field()
}

/// A field together with its spectrum, for repeated projections.
#[derive(Debug, Clone)]
pub struct Decomposition {
    spectrum: Spectrum,
}

impl Decomposition {
    pub fn new(f: &Field) -> Self {
        Self { spectrum: f.spectrum() }
    }

    pub fn from_spectrum(spectrum: Spectrum) -> Self {
        Self { spectrum }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn grid(&self) -> &GridSpec {
        self.spectrum.grid()
    }

    pub fn leq(&self, k: i32) -> Result<Field> {
        Ok(self.spectrum.leq(k)?.to_field())
    }

    /// `P_{<k} = P_{<=k-1}`.
    pub fn below(&self, k: i32) -> Result<Field> {
        self.leq(k - 1)
    }

    pub fn band(&self, k: i32) -> Result<Field> {
        Ok(self.spectrum.band(k)?.to_field())
    }

    pub fn range(&self, k1: i32, k2: i32) -> Result<Field> {
        Ok(self.spectrum.range(k1, k2)?.to_field())
    }

    pub fn above(&self, k: i32) -> Result<Field> {
        Ok(self.spectrum.above(k)?.to_field())
    }

    pub fn gradient(&self) -> Vec<Field> {
        (0..self.grid().dim())
            .map(|a| self.spectrum.derivative(a).to_field())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_plateau_and_support() {
        assert_eq!(bump_symbol(0.0), 1.0);
        assert_eq!(bump_symbol(0.5), 1.0);
        assert_eq!(bump_symbol(1.0), 1.0);
        assert_eq!(bump_symbol(2.0), 0.0);
        assert_eq!(bump_symbol(3.0), 0.0);
    }

    #[test]
    fn bump_midpoint_closed_form() {
        // m(1.5) = h(0.5) = e^{-2} / (e^{-2} + e^{-2}) = 1/2 exactly.
        assert_eq!(bump_symbol(1.5), 0.5);
        // m(1.25) = h(0.75) = e^{-4/3} / (e^{-4/3} + e^{-4}) = 1 / (1 + e^{-8/3})
        let expected = 1.0 / (1.0 + (-8.0f64 / 3.0).exp());
        assert!((bump_symbol(1.25) - expected).abs() < 1e-15);
    }

    #[test]
    fn bump_is_monotone() {
        let mut prev = 1.0;
        for i in 0..=1000 {
            let s = 1.0 + i as f64 / 1000.0;
            let v = bump_symbol(s);
            assert!(v <= prev + 1e-16, "not monotone at {s}");
            prev = v;
        }
    }

    #[test]
    fn level_above_nyquist_is_rejected() {
        let g = GridSpec::torus(1, 16).unwrap();
        let f = Field::zeros(g, 1);
        let kmax = g.dyadic_range().unwrap().k_max;
        assert!(project_leq(&f, kmax).is_ok());
        assert!(matches!(project_leq(&f, kmax + 1), Err(Error::Range { .. })));
        assert!(project_range(&f, 2, 1).is_err());
    }
}
