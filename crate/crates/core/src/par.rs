//! Index-ordered fan-out with a sequential fallback.
//!
//! Results are always returned in index order, so callers observe the same
//! output whether or not the work ran on the rayon pool.

/// `true` when the crate was built with the `parallel` feature.
pub const PARALLEL_AVAILABLE: bool = cfg!(feature = "parallel");

/// Evaluates `f(0..n)` and collects the results in index order.
///
/// When `parallel` is false, or the crate was built without the `parallel`
/// feature, the calls run sequentially on the current thread.
pub fn map_indexed<T, F>(parallel: bool, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if parallel && n > 1 {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = parallel;
    (0..n).map(f).collect()
}
