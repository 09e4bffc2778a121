//! Benchmark fixtures.

use std::sync::Arc;

use netdist_core::{random_network, PhyloNetwork, TaxaSet};

/// Seeded pairs of networks on `n` taxa with `r` reticulations each.
pub fn pairs(n: usize, r: usize, count: u64) -> Vec<(PhyloNetwork, PhyloNetwork)> {
    let taxa = Arc::new(TaxaSet::numbered(n));
    (0..count)
        .map(|s| {
            (
                random_network(&taxa, r, 2 * s),
                random_network(&taxa, r, 2 * s + 1),
            )
        })
        .collect()
}
