//! Data-parallel execution over documents.
//!
//! All per-document loops in the crate go through [`map`] / [`try_map`].
//! With the `parallel` feature (default) they fan out over rayon; without
//! it they run sequentially. Results are always joined in input order, so
//! both modes produce identical output.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map over items sequentially. Always available; used by benches to
/// compare against the rayon path.
pub fn map_sequential<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    items.iter().map(f).collect()
}

/// Map over items on the rayon pool, preserving input order.
#[cfg(feature = "parallel")]
pub fn map_parallel<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    items.par_iter().map(f).collect()
}

/// Map over items, parallel when the feature is enabled.
#[cfg(feature = "parallel")]
pub fn map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    map_parallel(items, f)
}

/// Map over items, parallel when the feature is enabled.
#[cfg(not(feature = "parallel"))]
pub fn map<T, R>(items: &[T], f: impl Fn(&T) -> R) -> Vec<R> {
    map_sequential(items, f)
}

/// Fallible map; on failure returns the error of the lowest-index failing
/// item regardless of completion order.
#[cfg(feature = "parallel")]
pub fn try_map<T: Sync, R: Send, E: Send>(
    items: &[T],
    f: impl Fn(&T) -> Result<R, E> + Sync,
) -> Result<Vec<R>, E> {
    map_parallel(items, f).into_iter().collect()
}

/// Fallible map; the sequential build short-circuits on the first error.
#[cfg(not(feature = "parallel"))]
pub fn try_map<T, R, E>(items: &[T], f: impl Fn(&T) -> Result<R, E>) -> Result<Vec<R>, E> {
    items.iter().map(f).collect()
}

/// Run `f` with the worker count capped at `jobs` (when parallel).
/// `None` or `0` leaves the global pool untouched.
#[cfg(feature = "parallel")]
pub fn with_jobs<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match jobs {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        _ => f(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_jobs<R>(_jobs: Option<usize>, f: impl FnOnce() -> R) -> R {
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let items: Vec<u64> = (0..1000).collect();
        let out = map(&items, |x| x * 2);
        assert_eq!(out, items.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_matches_sequential() {
        let items: Vec<u64> = (0..500).collect();
        let f = |x: &u64| (*x as f64).sqrt().sin();
        assert_eq!(map_parallel(&items, f), map_sequential(&items, f));
    }

    #[test]
    fn try_map_reports_lowest_index_error() {
        let items: Vec<u64> = (0..100).collect();
        let err = try_map(&items, |x| if *x >= 10 { Err(*x) } else { Ok(*x) });
        assert_eq!(err, Err(10));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn with_jobs_caps_pool() {
        let n = with_jobs(Some(1), rayon::current_num_threads);
        assert_eq!(n, 1);
    }
}
