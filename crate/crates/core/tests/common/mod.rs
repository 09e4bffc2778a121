//! Independent oracles shared by the integration tests. None of them call
//! into the canonical form or the search code they are used to check.

#![allow(dead_code)]

use std::sync::Arc;

use netdist_core::{EdgeId, Label, PhyloNetwork, PrunedGraph, TaxaSet, VertexId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A plain labelled edge list.
#[derive(Clone, Debug)]
pub struct Raw {
    pub labels: Vec<Option<Label>>,
    pub edges: Vec<(u32, u32)>,
}

impl Raw {
    pub fn of_network(n: &PhyloNetwork) -> Self {
        Raw {
            labels: n.vertices().map(|v| n.label(v)).collect(),
            edges: n
                .edges()
                .map(|e| {
                    let (a, b) = n.endpoints(e);
                    (a.0, b.0)
                })
                .collect(),
        }
    }

    pub fn of_pruned(g: &PrunedGraph) -> Self {
        Raw {
            labels: g.vertices().map(|v| g.label(v)).collect(),
            edges: g
                .edges()
                .map(|e| {
                    let (a, b) = g.endpoints(e);
                    (a.0, b.0)
                })
                .collect(),
        }
    }

    fn degrees(&self) -> Vec<(usize, usize)> {
        let mut d = vec![(0, 0); self.labels.len()];
        for &(a, b) in &self.edges {
            d[a as usize].1 += 1;
            d[b as usize].0 += 1;
        }
        d
    }

    /// Applies a vertex permutation `pv` and an edge permutation `pe`.
    pub fn permuted(&self, pv: &[u32], pe: &[usize]) -> Raw {
        let mut labels = vec![None; self.labels.len()];
        for (v, &to) in pv.iter().enumerate() {
            labels[to as usize] = self.labels[v];
        }
        let mut edges = vec![(0, 0); self.edges.len()];
        for (e, &to) in pe.iter().enumerate() {
            let (a, b) = self.edges[e];
            edges[to] = (pv[a as usize], pv[b as usize]);
        }
        Raw { labels, edges }
    }
}

/// A uniformly random relabelling of vertex and edge ids.
pub fn random_permutation(n: usize, m: usize, seed: u64) -> (Vec<u32>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pv: Vec<u32> = (0..n as u32).collect();
    pv.shuffle(&mut rng);
    let mut pe: Vec<usize> = (0..m).collect();
    pe.shuffle(&mut rng);
    (pv, pe)
}

/// Label- and multiplicity-preserving isomorphism by backtracking over
/// vertex bijections, pruned only by labels and degree profiles.
pub fn isomorphic(a: &Raw, b: &Raw) -> bool {
    let n = a.labels.len();
    if n != b.labels.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let (da, db) = (a.degrees(), b.degrees());
    let mut mult_b = std::collections::HashMap::new();
    for &e in &b.edges {
        *mult_b.entry(e).or_insert(0usize) += 1;
    }
    let mut map = vec![u32::MAX; n];
    let mut used = vec![false; n];
    fn go(
        v: usize,
        a: &Raw,
        b: &Raw,
        da: &[(usize, usize)],
        db: &[(usize, usize)],
        mult_b: &std::collections::HashMap<(u32, u32), usize>,
        map: &mut [u32],
        used: &mut [bool],
    ) -> bool {
        if v == map.len() {
            let mut mult_a = std::collections::HashMap::new();
            for &(x, y) in &a.edges {
                *mult_a
                    .entry((map[x as usize], map[y as usize]))
                    .or_insert(0usize) += 1;
            }
            return mult_a == *mult_b;
        }
        for w in 0..map.len() {
            if used[w] || a.labels[v] != b.labels[w] || da[v] != db[w] {
                continue;
            }
            map[v] = w as u32;
            used[w] = true;
            // Edges among already mapped vertices must exist in b.
            let consistent = a.edges.iter().all(|&(x, y)| {
                let (mx, my) = (map[x as usize], map[y as usize]);
                mx == u32::MAX || my == u32::MAX || mult_b.contains_key(&(mx, my))
            });
            if consistent && go(v + 1, a, b, da, db, mult_b, map, used) {
                return true;
            }
            used[w] = false;
            map[v] = u32::MAX;
        }
        false
    }
    go(0, a, b, &da, &db, &mult_b, &mut map, &mut used)
}

/// Directed cycle detection by three-colour depth-first search.
pub fn has_cycle(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut out = vec![vec![]; n];
    for &(a, b) in edges {
        out[a as usize].push(b as usize);
    }
    let mut colour = vec![0u8; n];
    fn visit(v: usize, out: &[Vec<usize>], colour: &mut [u8]) -> bool {
        colour[v] = 1;
        for &w in &out[v] {
            if colour[w] == 1 || (colour[w] == 0 && visit(w, out, colour)) {
                return true;
            }
        }
        colour[v] = 2;
        false
    }
    (0..n).any(|v| colour[v] == 0 && visit(v, &out, &mut colour))
}

/// (2n - 3)!!, the number of rooted binary trees on n labelled leaves.
pub fn rooted_tree_count(n: u64) -> u64 {
    (1..=2 * n - 3).step_by(2).product()
}

pub fn taxa(n: usize) -> Arc<TaxaSet> {
    Arc::new(TaxaSet::numbered(n))
}

/// A seeded network with `1..=max_n` taxa and `0..=max_r` reticulations.
pub fn sample_network(max_n: usize, max_r: usize, seed: u64) -> PhyloNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = rng.gen_range(1..=max_n);
    let r = rng.gen_range(0..=max_r);
    netdist_core::random_network(&taxa(n), r, seed)
}

/// Two seeded networks on the same taxa.
pub fn sample_pair(max_n: usize, max_r: usize, seed: u64) -> (PhyloNetwork, PhyloNetwork) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51ed_270b_1f83_5e2d);
    let t = taxa(rng.gen_range(2..=max_n));
    let a = netdist_core::random_network(&t, rng.gen_range(0..=max_r), rng.gen());
    let b = netdist_core::random_network(&t, rng.gen_range(0..=max_r), rng.gen());
    (a, b)
}

pub fn vid(v: u32) -> VertexId {
    VertexId(v)
}

pub fn eid(e: u32) -> EdgeId {
    EdgeId(e)
}

/// Checks the four conditions of an agreement embedding directly on edge
/// lists: paths are directed walks between the mapped endpoints, paths
/// partition the host edges, shared host vertices pair a sprout with a
/// labelled isolated vertex or a degree-two remnant, labels are kept.
pub fn embedding_holds(
    guest: &PrunedGraph,
    host: &PhyloNetwork,
    vmap: &[VertexId],
    emap: &[Vec<EdgeId>],
) -> bool {
    let g = Raw::of_pruned(guest);
    let h = Raw::of_network(host);
    if vmap.len() != g.labels.len() || emap.len() != g.edges.len() {
        return false;
    }
    let mut used = vec![0usize; h.edges.len()];
    for (ge, path) in emap.iter().enumerate() {
        let Some(first) = path.first() else {
            return false;
        };
        let mut at = h.edges[first.index()].0;
        if at != vmap[g.edges[ge].0 as usize].0 {
            return false;
        }
        for x in path {
            let (t, hd) = h.edges[x.index()];
            if t != at {
                return false;
            }
            used[x.index()] += 1;
            at = hd;
        }
        if at != vmap[g.edges[ge].1 as usize].0 {
            return false;
        }
    }
    if used.iter().any(|&c| c != 1) {
        return false;
    }
    let deg = g.degrees();
    let sprout = |v: usize| g.labels[v].is_none() && deg[v].0 + deg[v].1 == 1;
    let sharer = |v: usize| {
        (g.labels[v].is_some() && deg[v] == (0, 0))
            || (g.labels[v].is_none() && (deg[v] == (2, 0) || deg[v] == (0, 2)))
    };
    for hv in 0..h.labels.len() as u32 {
        let vs: Vec<usize> = (0..vmap.len()).filter(|&v| vmap[v].0 == hv).collect();
        let ok = match vs.as_slice() {
            [] | [_] => true,
            [a, b] => (sprout(*a) && sharer(*b)) || (sprout(*b) && sharer(*a)),
            _ => false,
        };
        if !ok {
            return false;
        }
    }
    let guest_labels: Vec<Label> = g.labels.iter().flatten().copied().collect();
    let host_labels: Vec<Label> = h.labels.iter().flatten().copied().collect();
    guest_labels.len() == host_labels.len()
        && (0..g.labels.len())
            .all(|v| g.labels[v].is_none() || g.labels[v] == h.labels[vmap[v].index()])
}
