//! Data-parallel map helpers.
//!
//! All embarrassingly parallel loops in the crate (raster cells, scan cells,
//! batched series evaluation, independent table entries of one degree) go
//! through [`map_indexed`]. With the default `parallel` feature the work is
//! distributed over a rayon pool; without it the same closure runs
//! sequentially, producing bit-identical results. Keeping the fan-out in one
//! place makes the sequential fallback trivial to audit.

/// Apply `f` to every index in `0..n` and collect the results in order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Apply `f` to every index in `0..n` and collect the results in order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Apply `f` to every element of `items` and collect the results in order.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    map_indexed(items.len(), |k| f(&items[k]))
}
