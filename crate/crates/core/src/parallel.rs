//! Order-preserving maps over independent work items.
//!
//! With the `parallel` feature the work is spread over the rayon pool;
//! without it, or with [`Execution::Sequential`], items run in order on the
//! calling thread. Results always come back in input order.

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

pub fn map_with<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    match exec {
        Execution::Sequential => items.iter().enumerate().map(|(i, t)| f(i, t)).collect(),
        Execution::Parallel => par_map(items, f),
    }
}

#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(usize, &T) -> R + Sync + Send,
{
    items.iter().enumerate().map(|(i, t)| f(i, t)).collect()
}

/// Limit the global pool to `jobs` threads; a no-op without the feature.
pub fn configure_threads(jobs: usize) {
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_preserve_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = map_with(Execution::Sequential, &xs, |i, x| x * x + i as u64);
        let b = map_with(Execution::Parallel, &xs, |i, x| x * x + i as u64);
        assert_eq!(a, b);
    }
}
