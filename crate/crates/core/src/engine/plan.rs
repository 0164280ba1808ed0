use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_seed, streams};

/// One epoch's work assignment: a seeded permutation of the edges cut into
/// contiguous per-worker chunks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpochPlan {
    pub order: Vec<usize>,
    pub chunks: Vec<Range<usize>>,
}

impl EpochPlan {
    pub fn new(num_edges: usize, workers: usize, seed: u64, epoch: usize) -> Self {
        let mut order: Vec<usize> = (0..num_edges).collect();
        let mut rng =
            ChaCha8Rng::seed_from_u64(derive_seed(seed, &[streams::SHUFFLE, epoch as u64]));
        order.shuffle(&mut rng);
        Self {
            order,
            chunks: chunk_ranges(num_edges, workers),
        }
    }

    pub fn chunk(&self, worker: usize) -> &[usize] {
        &self.order[self.chunks[worker].clone()]
    }
}

/// Splits `0..total` into `workers` contiguous ranges whose lengths differ
/// by at most one; the first `total % workers` ranges are the longer ones.
pub fn chunk_ranges(total: usize, workers: usize) -> Vec<Range<usize>> {
    assert!(workers > 0, "at least one worker");
    let q = total / workers;
    let r = total % workers;
    let mut start = 0;
    (0..workers)
        .map(|w| {
            let len = q + usize::from(w < r);
            let range = start..start + len;
            start += len;
            range
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_partition_the_range() {
        assert_eq!(chunk_ranges(10, 3), vec![0..4, 4..7, 7..10]);
        assert_eq!(chunk_ranges(2, 4), vec![0..1, 1..2, 2..2, 2..2]);
    }

    #[test]
    fn plan_is_a_seeded_permutation() {
        let a = EpochPlan::new(100, 4, 9, 3);
        let mut sorted = a.order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_eq!(a, EpochPlan::new(100, 4, 9, 3));
        assert_ne!(a.order, EpochPlan::new(100, 4, 9, 4).order);
    }
}
