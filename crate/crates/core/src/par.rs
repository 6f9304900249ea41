//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the loops below run on the
//! rayon global pool; without it they run in place. Reductions always split
//! the index space into the same fixed-size blocks and combine the block
//! partials left to right, so results are bitwise identical either way and
//! independent of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Number of items per reduction block.
pub const REDUCE_BLOCK: usize = 4096;

/// Dispatching to a one-thread pool only adds a cross-thread handoff.
#[cfg(feature = "parallel")]
fn use_pool() -> bool {
    rayon::current_num_threads() > 1
}

/// Applies `f` to consecutive chunks of `data`, passing the chunk index.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Send + Sync,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    if use_pool() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
        return;
    }
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

/// Maps `0..len` through `f`, preserving order.
pub fn map_indexed<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if use_pool() {
        return (0..len).into_par_iter().map(f).collect();
    }
    (0..len).map(f).collect()
}

/// Deterministic sum of `f(i)` over `0..len`.
pub fn sum<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partials = map_indexed(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(len);
        (lo..hi).map(&f).sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Maximum of `f(i)` over `0..len`; `0.0` for an empty range.
///
/// NaN values propagate so that a poisoned field is never reported as small.
pub fn max<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    let blocks = len.div_ceil(REDUCE_BLOCK);
    let partials = map_indexed(blocks, |b| {
        let lo = b * REDUCE_BLOCK;
        let hi = (lo + REDUCE_BLOCK).min(len);
        let mut m = 0.0_f64;
        let mut nan = false;
        for v in (lo..hi).map(&f) {
            nan |= v.is_nan();
            m = m.max(v);
        }
        if nan {
            f64::NAN
        } else {
            m
        }
    });
    partials.into_iter().fold(0.0, nan_max)
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Builds a component-major array of `comps` values per point by evaluating
/// `f(point, out)` at every point.
pub fn pointwise<F>(points: usize, comps: usize, f: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    let mut point_major = vec![0.0; points * comps];
    for_each_chunk_mut(&mut point_major, comps * 256, |b, chunk| {
        let base = b * 256;
        for (j, out) in chunk.chunks_mut(comps).enumerate() {
            f(base + j, out);
        }
    });
    let mut out = vec![0.0; points * comps];
    for_each_chunk_mut(&mut out, points, |c, row| {
        for (p, v) in row.iter_mut().enumerate() {
            *v = point_major[p * comps + c];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_is_blockwise_deterministic() {
        let n = 3 * REDUCE_BLOCK + 17;
        let a = sum(n, |i| (i as f64).sin());
        let b = sum(n, |i| (i as f64).sin());
        assert_eq!(a.to_bits(), b.to_bits());
        let naive: f64 = (0..n).map(|i| (i as f64).sin()).sum();
        assert!((a - naive).abs() < 1e-9);
    }

    #[test]
    fn max_propagates_nan() {
        assert!(max(10, |i| if i == 7 { f64::NAN } else { 1.0 }).is_nan());
        assert_eq!(max(0, |_| 1.0), 0.0);
    }

    #[test]
    fn pointwise_is_component_major() {
        let v = pointwise(5, 2, |p, out| {
            out[0] = p as f64;
            out[1] = -(p as f64);
        });
        assert_eq!(v, vec![0.0, 1.0, 2.0, 3.0, 4.0, -0.0, -1.0, -2.0, -3.0, -4.0]);
    }
}
