//! Explicit network spaces for exhaustive checks on few taxa.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use rayon::prelude::*;

use crate::canonical::{Canonical, CanonicalKey};
use crate::network::PhyloNetwork;
use crate::random::enumerate_trees;
use crate::rearrangement::{enumerate_ops, OpKind, OpSet};
use crate::taxa::TaxaSet;

use super::search::capped_neighbors;

/// Every network on a taxa set with at most `max_r` reticulations, one per
/// isomorphism class, ordered by reticulation number then discovery.
pub struct NetworkSpace {
    pub max_r: usize,
    pub networks: Vec<PhyloNetwork>,
    pub keys: Vec<CanonicalKey>,
    index: HashMap<CanonicalKey, usize>,
}

impl NetworkSpace {
    /// Starts from all trees and closes under additions. Every network with
    /// a reticulation admits a removal (at its topmost reticulation), so the
    /// closure is complete.
    pub fn build(taxa: &Arc<TaxaSet>, max_r: usize) -> Self {
        let mut networks = enumerate_trees(taxa);
        let mut keys: Vec<CanonicalKey> = networks.iter().map(|n| n.canonical_key()).collect();
        let mut index: HashMap<CanonicalKey, usize> = keys
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        let mut level: Vec<usize> = (0..networks.len()).collect();
        for _ in 0..max_r {
            let produced: Vec<Vec<(CanonicalKey, PhyloNetwork)>> = level
                .par_iter()
                .map(|&i| {
                    let g = &networks[i];
                    enumerate_ops(g, OpSet::Pr)
                        .into_iter()
                        .filter(|o| o.kind() == OpKind::PrPlus)
                        .map(|o| {
                            let h = crate::rearrangement::apply_unchecked(g, &o);
                            (h.canonical_key(), h)
                        })
                        .collect()
                })
                .collect();
            let mut next = Vec::new();
            for (k, h) in produced.into_iter().flatten() {
                if !index.contains_key(&k) {
                    index.insert(k.clone(), networks.len());
                    next.push(networks.len());
                    keys.push(k);
                    networks.push(h);
                }
            }
            level = next;
        }
        NetworkSpace {
            max_r,
            networks,
            keys,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    pub fn index_of(&self, key: &CanonicalKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Indices of the networks with at most `r` reticulations.
    pub fn up_to(&self, r: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.networks[i].reticulation_count() <= r)
            .collect()
    }

    /// Neighbour lists for one operation set, restricted to the space.
    pub fn adjacency(&self, ops: OpSet) -> Vec<Vec<u32>> {
        self.networks
            .par_iter()
            .map(|g| {
                capped_neighbors(g, ops, self.max_r)
                    .into_iter()
                    .map(|(k, _)| self.index[&k] as u32)
                    .collect()
            })
            .collect()
    }

    /// Breadth-first distances from `src` through networks with at most
    /// `cap` reticulations.
    pub fn distances_from(&self, adj: &[Vec<u32>], src: usize, cap: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            let d = dist[x].unwrap();
            for &y in &adj[x] {
                let y = y as usize;
                if dist[y].is_none() && self.networks[y].reticulation_count() <= cap {
                    dist[y] = Some(d + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }
}
