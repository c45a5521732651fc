//! Order-preserving map over work items, parallel when the `parallel`
//! feature is enabled.

/// Maps `f` over `items` and returns results in input order.
///
/// `threads = None` uses the global pool; `Some(n)` runs on a dedicated
/// pool of `n` workers. Without the `parallel` feature the thread count is
/// ignored and the map runs on the calling thread.
#[cfg(feature = "parallel")]
pub(crate) fn ordered_map<T, R, F>(items: &[T], threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match threads {
        Some(1) => items.iter().map(f).collect(),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.par_iter().map(f).collect(),
        },
        None => items.par_iter().map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn ordered_map<T, R, F>(items: &[T], _threads: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.iter().map(f).collect()
}
