//! Execution strategy for the data-parallel loops (covariance assembly,
//! pair scans, replicate sweeps).
//!
//! With the `parallel` feature (default) the [`Execution::Parallel`] strategy
//! runs on the rayon global pool. Without it, `Parallel` silently degrades to
//! the sequential path. Both strategies produce outputs in index order, so
//! results never depend on the worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Evaluates `f(0), f(1), ..., f(n - 1)` and returns the results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Thread policy handed to the dense linear algebra.
    pub fn faer_par(self) -> faer::Par {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => faer::Par::rayon(0),
            _ => faer::Par::Seq,
        }
    }

    /// Calls `f(k, chunk)` for every consecutive `chunk_len` slice of `data`.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk_len: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => data
                .par_chunks_mut(chunk_len)
                .enumerate()
                .for_each(|(k, c)| f(k, c)),
            _ => data.chunks_mut(chunk_len).enumerate().for_each(|(k, c)| f(k, c)),
        }
    }
}
