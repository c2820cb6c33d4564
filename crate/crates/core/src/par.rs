//! Ordered data-parallel helpers.
//!
//! Work is split into fixed-size chunks whose partial sums are combined in
//! index order, so results do not depend on the thread count or on whether
//! the `parallel` feature is enabled.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

const CHUNK: usize = 64;

/// Execution strategy for the heavy loops.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// Use the rayon pool when the `parallel` feature is on.
    #[default]
    Parallel,
    /// Plain iterator loop on the calling thread.
    Sequential,
}

/// Cooperative cancellation flag shared between a caller and long computations.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

/// Maps `f` over `0..len`, preserving order.
pub fn map_range<R, F>(exec: Exec, len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(f).collect()
        }
        _ => (0..len).map(f).collect(),
    }
}

/// Maps `f` over a slice, preserving order.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_range(exec, items.len(), |i| f(&items[i]))
}

/// Sums `f(i)` for `i in 0..len` with a fixed reduction tree.
pub fn sum_range<F>(exec: Exec, len: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    map_range(exec, chunks, |c| {
        let end = ((c + 1) * CHUNK).min(len);
        (c * CHUNK..end).map(&f).sum::<Complex64>()
    })
    .into_iter()
    .sum()
}

/// Sums `f(item)` over a slice with a fixed reduction tree.
pub fn sum_slice<T, F>(exec: Exec, items: &[T], f: F) -> Complex64
where
    T: Sync,
    F: Fn(&T) -> Complex64 + Sync + Send,
{
    sum_range(exec, items.len(), |i| f(&items[i]))
}

/// Runs `f` on a dedicated pool of `threads` workers.
///
/// Without the `parallel` feature the closure runs on the calling thread.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        f()
    }
}

/// Worker count of the active pool (1 without the `parallel` feature).
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
