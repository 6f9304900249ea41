//! Periodic grids, Fourier transforms and Littlewood-Paley projections.

mod fft;
mod field;
mod grid;
mod projection;

pub use field::{Field, Spectrum};
pub use grid::{DyadicRange, GridSpec};
pub use projection::{
    band_symbol, bump_symbol, laplacian, leq_symbol, project_band, project_leq, project_range,
    range_symbol, smooth_step, spatial_gradient, Decomposition,
};
