//! Execution policy for the data-parallel inner loops.
//!
//! Every parallel loop in this crate maps over an index range and collects
//! results in index order before reducing, so the serial and parallel routes
//! produce bit-identical numbers regardless of thread scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether data-parallel loops fan out onto the rayon pool.
///
/// With the `parallel` feature disabled the policy always runs serially.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecPolicy {
    pub parallel: bool,
}

impl Default for ExecPolicy {
    fn default() -> Self {
        Self { parallel: cfg!(feature = "parallel") }
    }
}

impl ExecPolicy {
    pub fn serial() -> Self {
        Self { parallel: false }
    }

    /// Maps `f` over `0..n`, returning results in index order.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Fallible variant of [`map_indexed`](Self::map_indexed); the first
    /// error in index order wins.
    pub fn try_map_indexed<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.parallel {
            let results: Vec<Result<T, E>> = (0..n).into_par_iter().map(f).collect();
            return results.into_iter().collect();
        }
        (0..n).map(f).collect()
    }
}
