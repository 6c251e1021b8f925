//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the `Parallel` strategy runs on rayon's
//! global pool; without it every strategy runs on the calling thread.
//! Results never depend on the strategy: each work item is computed by one
//! thread in a fixed order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Calls `f(row_index, row)` for every `width`-sized row of `data` and sums
/// the returned values.
pub fn for_each_row<S, C, F>(par: Parallelism, data: &mut [S], width: usize, f: F) -> C
where
    S: Send,
    C: Send + std::iter::Sum<C>,
    F: Fn(usize, &mut [S]) -> C + Sync + Send,
{
    assert!(width > 0, "row width must be positive");
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return data
            .par_chunks_mut(width)
            .enumerate()
            .map(|(i, row)| f(i, row))
            .sum();
    }
    let _ = par;
    data.chunks_mut(width)
        .enumerate()
        .map(|(i, row)| f(i, row))
        .sum()
}

/// Like [`for_each_row`] without a result.
pub fn fill_rows<S, F>(par: Parallelism, data: &mut [S], width: usize, f: F)
where
    S: Send,
    F: Fn(usize, &mut [S]) + Sync + Send,
{
    assert!(width > 0, "row width must be positive");
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        data.par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = par;
    data.chunks_mut(width)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// `items.iter().map(f).collect()`, possibly in parallel; output order
/// follows input order.
pub fn map_collect<T, R, F>(par: Parallelism, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}
