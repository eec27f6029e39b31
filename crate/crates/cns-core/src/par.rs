//! Data-parallel dispatch for ensemble work (independent runs, sample sweeps).
//!
//! With the default `parallel` feature the maps run on the rayon pool; without
//! it they fall back to plain sequential iteration. Individual integrations
//! are always sequential in time; only independent work items fan out.

/// Map `f` over `items`, preserving order.
#[cfg(feature = "parallel")]
pub fn parallel_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn parallel_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Sequential map with the same signature, kept for benchmarking the two
/// dispatch paths against each other.
pub fn serial_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Configure the global thread pool size. A no-op without the `parallel`
/// feature or if a pool was already built.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}
