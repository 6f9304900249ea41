//! Multi-dimensional FFT on row-major arrays, one axis at a time.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::GridSpec;
use crate::par;

type Plan = Arc<dyn Fft<f64>>;
type PlanCache = Mutex<(FftPlanner<f64>, HashMap<(usize, bool), Plan>)>;

fn plan(len: usize, inverse: bool) -> Plan {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let (planner, plans) = &mut *guard;
    plans
        .entry((len, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(len)
            } else {
                planner.plan_fft_forward(len)
            }
        })
        .clone()
}

/// In-place transform of one scalar array laid out on `grid`.
///
/// The forward transform carries the `1/N^n` factor, so coefficients are
/// averages against `e^{-iκ·x}` and the inverse is a plain sum.
pub fn transform(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    debug_assert_eq!(data.len(), grid.len());
    let n = grid.points();
    let fft = plan(n, inverse);
    for axis in 0..grid.dim() {
        let stride = grid.stride(axis);
        if stride == 1 {
            let lines_per_task = (4096 / n).max(1);
            par::for_each_chunk_mut(data, n * lines_per_task, |_, chunk| fft.process(chunk));
        } else {
            let block = n * stride;
            let blocks = data.len() / block;
            if blocks > 1 {
                par::for_each_chunk_mut(data, block, |_, b| strided_block(&fft, b, n, stride));
            } else {
                strided_block_wide(&fft, data, n, stride);
            }
        }
    }
    if !inverse {
        let scale = 1.0 / grid.len() as f64;
        par::for_each_chunk_mut(data, 1 << 14, |_, c| c.iter_mut().for_each(|z| *z *= scale));
    }
}

// A block holds `stride` interleaved lines of length `n`; transpose, transform, transpose back.
fn strided_block(fft: &Plan, block: &mut [Complex64], n: usize, stride: usize) {
    let mut scratch = vec![Complex64::default(); block.len()];
    for i in 0..n {
        for j in 0..stride {
            scratch[j * n + i] = block[i * stride + j];
        }
    }
    fft.process(&mut scratch);
    for i in 0..n {
        for j in 0..stride {
            block[i * stride + j] = scratch[j * n + i];
        }
    }
}

// Single block spanning the whole array (the slowest axis): parallelise the line FFTs.
fn strided_block_wide(fft: &Plan, block: &mut [Complex64], n: usize, stride: usize) {
    let mut scratch = vec![Complex64::default(); block.len()];
    par::for_each_chunk_mut(&mut scratch, n, |j, line| {
        for (i, z) in line.iter_mut().enumerate() {
            *z = block[i * stride + j];
        }
    });
    let lines_per_task = (4096 / n).max(1);
    par::for_each_chunk_mut(&mut scratch, n * lines_per_task, |_, chunk| fft.process(chunk));
    par::for_each_chunk_mut(block, stride, |i, row| {
        for (j, z) in row.iter_mut().enumerate() {
            *z = scratch[j * n + i];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(grid: &GridSpec, data: &[Complex64]) -> Vec<Complex64> {
        let len = grid.len();
        let n = grid.points() as f64;
        (0..len)
            .map(|k| {
                let xi = grid.lattice_frequency(k);
                let mut acc = Complex64::default();
                for (x, v) in data.iter().enumerate() {
                    let phase: f64 = (0..grid.dim())
                        .map(|a| xi[a] as f64 * grid.axis_index(x, a) as f64)
                        .sum::<f64>()
                        * 2.0
                        * std::f64::consts::PI
                        / n;
                    acc += v * Complex64::from_polar(1.0, -phase);
                }
                acc / len as f64
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_three_dimensions() {
        let grid = GridSpec::torus(3, 4).unwrap();
        let data: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        transform(&grid, &mut fast, false);
        let slow = naive_dft(&grid, &data);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        transform(&grid, &mut fast, true);
        for (a, b) in fast.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
