//! Execution policy: data-parallel loops over subsystems with a sequential
//! fallback. The parallel path is only available with the `parallel` feature;
//! both paths produce identical results because outputs are written in index
//! order and reductions run over the collected buffer.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Parallelism {
    Sequential,
    #[default]
    Rayon,
}

impl Parallelism {
    /// Preferred policy for this build: rayon when compiled in.
    pub fn auto() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }

    pub fn is_parallel(self) -> bool {
        matches!(self, Parallelism::Rayon) && cfg!(feature = "parallel")
    }
}

/// Derive an independent stream seed (splitmix64 finalizer over the pair).
pub(crate) fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut x = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Batches below this size never amortize the fork-join dispatch; they run
/// sequentially under either policy (the results are identical either way).
#[cfg(feature = "parallel")]
const PARALLEL_MIN_BATCH: usize = 32;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(policy: Parallelism, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() && n >= PARALLEL_MIN_BATCH {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = policy;
    (0..n).map(f).collect()
}

/// Apply `f` to every element of `items` in place.
pub fn for_each_mut<T, F>(policy: Parallelism, items: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if policy.is_parallel() && items.len() >= PARALLEL_MIN_BATCH {
        use rayon::prelude::*;
        items
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, item)| f(i, item));
        return;
    }
    let _ = policy;
    for (i, item) in items.iter_mut().enumerate() {
        f(i, item);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_results_are_index_ordered_for_both_policies() {
        let seq = map_indexed(Parallelism::Sequential, 64, |i| i * i);
        let par = map_indexed(Parallelism::auto(), 64, |i| i * i);
        assert_eq!(seq, par);
    }
}
