//! Sequential / data-parallel execution of index-space sweeps.
//!
//! All sweeps in the crate (Monte Carlo trials, labeling search, brute-force
//! enumeration, grid checks) are written as a map over `0..len` followed by an
//! associative reduction. The reduction must be associative for results to be
//! independent of the execution mode; floating-point sums are therefore never
//! reduced this way, only counts, exact rationals, and max/min with a
//! deterministic tie-break.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    /// Runs on the rayon global pool when the `parallel` feature is enabled,
    /// sequentially otherwise.
    #[default]
    Parallel,
}

impl Execution {
    /// True when this mode actually fans out to worker threads.
    pub fn is_parallel(&self) -> bool {
        cfg!(feature = "parallel") && *self == Execution::Parallel
    }

    pub fn map_reduce<T, M, R>(self, len: usize, identity: T, map: M, reduce: R) -> T
    where
        T: Clone + Send + Sync,
        M: Fn(usize) -> T + Send + Sync,
        R: Fn(T, T) -> T + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..len)
                .into_par_iter()
                .map(map)
                .reduce(|| identity.clone(), reduce);
        }
        (0..len).map(map).fold(identity, reduce)
    }

    /// Maps every index and collects the results in index order.
    pub fn map_collect<T, M>(self, len: usize, map: M) -> Vec<T>
    where
        T: Send,
        M: Fn(usize) -> T + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(map).collect();
        }
        (0..len).map(map).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as u64 * 2654435761) % 1000;
        let seq = Execution::Sequential.map_reduce(10_000, 0u64, f, |a, b| a + b);
        let par = Execution::Parallel.map_reduce(10_000, 0u64, f, |a, b| a + b);
        assert_eq!(seq, par);
        assert_eq!(
            Execution::Sequential.map_collect(100, f),
            Execution::Parallel.map_collect(100, f)
        );
    }

    #[test]
    fn empty_range_gives_identity() {
        assert_eq!(
            Execution::Parallel.map_reduce(0, 7u32, |_| 1, |a, b| a + b),
            7
        );
    }
}
