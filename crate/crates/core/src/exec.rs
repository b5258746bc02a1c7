//! Execution policy for the data-parallel loops (grid points, benchmark
//! series, candidate patch scoring).
//!
//! With the `parallel` feature disabled every policy runs sequentially.
//! Results are always returned in input order, so the choice of policy never
//! changes an output.

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this policy will actually fan out work.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Minimum of `f(i)` over `0..n` under `PartialOrd`, first index wins on
    /// ties. `None` entries are skipped.
    pub fn min_by_index<K, F>(self, n: usize, f: F) -> Option<(usize, K)>
    where
        K: PartialOrd + Send + Copy,
        F: Fn(usize) -> Option<K> + Sync + Send,
    {
        fn pick<K: PartialOrd + Copy>(
            a: Option<(usize, K)>,
            b: Option<(usize, K)>,
        ) -> Option<(usize, K)> {
            match (a, b) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => {
                    if b.1 < a.1 || (!(a.1 < b.1) && b.0 < a.0) {
                        Some(b)
                    } else {
                        Some(a)
                    }
                }
            }
        }

        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n)
                .into_par_iter()
                .map(|i| f(i).map(|k| (i, k)))
                .reduce(|| None, pick);
        }
        (0..n).map(|i| f(i).map(|k| (i, k))).fold(None, pick)
    }
}
