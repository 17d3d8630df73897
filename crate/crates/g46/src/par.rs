//! Thin switch between rayon-backed data parallelism and plain sequential
//! loops. The `parallel` cargo feature controls whether rayon is linked at
//! all; at runtime a `jobs` count of 1 forces the sequential path so the two
//! strategies can be compared in benches on the same build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Run `f` inside a thread pool bounded by `jobs` threads (when parallelism
/// is compiled in and `jobs > 1`); otherwise run it directly. Parallel maps
/// invoked inside `f` are bounded by this pool.
#[cfg(feature = "parallel")]
pub fn with_pool<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    if jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(f);
        }
    }
    f()
}

#[cfg(not(feature = "parallel"))]
pub fn with_pool<R: Send>(_jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

/// Map `f` over `items`, in parallel when `jobs != 1` and the `parallel`
/// feature is enabled, sequentially otherwise. Order is preserved.
#[cfg(feature = "parallel")]
pub fn map_collect<T, R>(jobs: usize, items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R>
where
    T: Send,
    R: Send,
{
    if jobs == 1 {
        items.into_iter().map(f).collect()
    } else {
        items.into_par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, R>(_jobs: usize, items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R>
where
    T: Send,
    R: Send,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_collect_preserves_order() {
        let v: Vec<u64> = (0..100).collect();
        for jobs in [1, 4] {
            let out = map_collect(jobs, v.clone(), |x| x * x);
            assert_eq!(out, v.iter().map(|x| x * x).collect::<Vec<_>>());
        }
    }

    #[test]
    fn with_pool_returns_closure_result() {
        assert_eq!(with_pool(1, || 7), 7);
        assert_eq!(with_pool(4, || 7), 7);
    }
}
