//! Seeded random networks and exhaustive tree enumeration.

use std::collections::HashSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::Canonical;
use crate::graph::{EditGraph, Label};
use crate::network::PhyloNetwork;
use crate::rearrangement::{apply_unchecked, enumerate_ops, OpKind, OpSet};
use crate::taxa::TaxaSet;

/// Subdivides edge `e` and hangs a new leaf labelled `taxon` below it.
pub fn insert_leaf(g: &PhyloNetwork, e: u32, taxon: u32) -> PhyloNetwork {
    let mut w = EditGraph::from_graph(g.graph());
    let (m, _, _) = w.subdivide(e);
    let leaf = w.add_vertex(Some(Label::Taxon(taxon)));
    w.add_edge(m, leaf);
    let (mg, _, _) = w.compact();
    PhyloNetwork::from_graph(g.taxa().clone(), mg)
}

/// A random network on `taxa` with `r` reticulations. Leaves are inserted
/// one at a time on a uniformly chosen edge, then `r` additions are drawn
/// uniformly from the valid ones. Equal seeds give equal networks.
pub fn random_network(taxa: &Arc<TaxaSet>, r: usize, seed: u64) -> PhyloNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = PhyloNetwork::single_leaf(taxa.clone(), 0);
    for t in 1..taxa.len() as u32 {
        let e = rng.gen_range(0..g.edge_count() as u32);
        g = insert_leaf(&g, e, t);
    }
    for _ in 0..r {
        let plus: Vec<_> = enumerate_ops(&g, OpSet::Pr)
            .into_iter()
            .filter(|op| op.kind() == OpKind::PrPlus)
            .collect();
        let op = plus.choose(&mut rng).expect("an addition always exists");
        g = apply_unchecked(&g, op);
    }
    g
}

/// A random rooted binary tree on `taxa`.
pub fn random_tree(taxa: &Arc<TaxaSet>, seed: u64) -> PhyloNetwork {
    random_network(taxa, 0, seed)
}

/// Every rooted binary tree on `taxa`, one per isomorphism class.
pub fn enumerate_trees(taxa: &Arc<TaxaSet>) -> Vec<PhyloNetwork> {
    let mut level = vec![PhyloNetwork::single_leaf(taxa.clone(), 0)];
    for t in 1..taxa.len() as u32 {
        let mut seen = HashSet::new();
        let mut next = Vec::new();
        for g in &level {
            for e in 0..g.edge_count() as u32 {
                let h = insert_leaf(g, e, t);
                if seen.insert(h.canonical_key()) {
                    next.push(h);
                }
            }
        }
        level = next;
    }
    level
}
