//! Replicate-level data parallelism with a sequential fallback.
//!
//! With the `parallel` feature (default) the helpers run on rayon; without it
//! they compile to plain loops. Results are reduced in index order or with
//! exact (integer) merges, so outputs are identical across thread counts and
//! across the two builds.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parallelism {
    /// Use the global thread pool (or the sequential build's plain loop).
    Auto,
    /// Force a single worker.
    Sequential,
    /// A dedicated pool with this many threads.
    Threads(usize),
}

impl Default for Parallelism {
    fn default() -> Self {
        Parallelism::Auto
    }
}

/// Run `f` under the requested parallelism. All crate-internal parallel
/// iteration inside `f` is bound by the installed pool.
#[cfg(feature = "parallel")]
pub fn run_with<R: Send>(par: Parallelism, f: impl FnOnce() -> R + Send) -> R {
    match par {
        Parallelism::Auto => f(),
        Parallelism::Sequential => pool_run(1, f),
        Parallelism::Threads(k) => pool_run(k.max(1), f),
    }
}

#[cfg(feature = "parallel")]
fn pool_run<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("failed to build thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn run_with<R: Send>(_par: Parallelism, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Map over 0..n, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T: Send>(n: u64, f: impl Fn(u64) -> T + Send + Sync) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T: Send>(n: u64, f: impl Fn(u64) -> T + Send + Sync) -> Vec<T> {
    (0..n).map(f).collect()
}

/// Chunked map-reduce over the index range 0..total. `merge` must be exact
/// and commutative (integer accumulation) so that the reduction order cannot
/// change the result.
pub fn map_reduce_ranges<T, I, B, M>(total: u64, chunk: u64, init: I, body: B, merge: M) -> T
where
    T: Send,
    I: Fn() -> T + Send + Sync,
    B: Fn(&mut T, std::ops::Range<u64>) + Send + Sync,
    M: Fn(T, T) -> T + Send + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk).max(1);
    let run = |c: u64| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(total);
        let mut acc = init();
        body(&mut acc, lo..hi);
        acc
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n_chunks)
            .into_par_iter()
            .map(run)
            .reduce_with(&merge)
            .unwrap_or_else(&init)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n_chunks).map(run).fold(init(), &merge)
    }
}
