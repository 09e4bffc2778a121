//! Prunings of networks and pruned graphs.
//!
//! A set of prunings applied to a network is described by its cuts: for each
//! pruning, the host vertex it detaches from and the host edge adjacent to
//! that vertex. Every host vertex carries at most one cut, and any set of `k`
//! such cuts is the result of `k` prunings in any order.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{Canonical, CanonicalKey};
use crate::error::AgreementError;
use crate::graph::{EdgeId, EditGraph, Multigraph, VertexId};
use crate::network::PhyloNetwork;
use crate::pruned::PrunedGraph;

use super::embedding::AgreementEmbedding;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneEnd {
    Tail,
    Head,
}

/// Detach `edge` at one of its endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pruning {
    pub edge: EdgeId,
    pub end: PruneEnd,
}

impl Pruning {
    pub fn at_tail(edge: EdgeId) -> Self {
        Pruning {
            edge,
            end: PruneEnd::Tail,
        }
    }

    pub fn at_head(edge: EdgeId) -> Self {
        Pruning {
            edge,
            end: PruneEnd::Head,
        }
    }
}

fn prunable_at(g: &PrunedGraph, v: VertexId) -> bool {
    g.label(v).is_some() || g.indegree(v) + g.outdegree(v) == 3
}

/// Every legal pruning of `g`, edges by id, tail before head.
pub fn enumerate_prunings(g: &PrunedGraph) -> Vec<Pruning> {
    let mut out = Vec::new();
    for e in g.edges() {
        let (u, v) = g.endpoints(e);
        if prunable_at(g, u) {
            out.push(Pruning::at_tail(e));
        }
        if prunable_at(g, v) {
            out.push(Pruning::at_head(e));
        }
    }
    out
}

/// Applies one pruning; the result has exactly one sprout more than `g`.
pub fn apply_pruning(g: &PrunedGraph, p: Pruning) -> Result<PrunedGraph, AgreementError> {
    if p.edge.index() >= g.edge_count() {
        return Err(AgreementError::Pruning(format!(
            "edge {} does not exist",
            p.edge
        )));
    }
    let (u, v) = g.endpoints(p.edge);
    let at = if p.end == PruneEnd::Tail { u } else { v };
    if !prunable_at(g, at) {
        return Err(AgreementError::Pruning(format!(
            "{at} is neither labelled nor of degree three"
        )));
    }
    let mut w = EditGraph::from_graph(&g.g);
    w.remove_edge(p.edge.0);
    let sprout = w.add_vertex(None);
    match p.end {
        PruneEnd::Tail => w.add_edge(sprout, v.0),
        PruneEnd::Head => w.add_edge(u.0, sprout),
    };
    let a = at.0 as usize;
    if g.label(at).is_none() && w.inc[a].len() == 1 && w.out[a].len() == 1 {
        w.suppress(at.0);
    }
    let (mg, _, _) = w.compact();
    Ok(PrunedGraph::from_graph(g.taxa().clone(), mg))
}

/// Applies prunings in order.
pub fn apply_prunings(g: &PrunedGraph, ps: &[Pruning]) -> Result<PrunedGraph, AgreementError> {
    let mut cur = g.clone();
    for &p in ps {
        cur = apply_pruning(&cur, p)?;
    }
    Ok(cur)
}

/// A cut: host vertex and an incident host edge detached from it.
pub(crate) type Cut = (u32, u32);

/// The pruned graph given by `cuts` on `host` together with its canonical
/// agreement embedding. Surviving host vertices keep their relative order,
/// sprouts follow in cut order; guest edges are ordered by their first host
/// edge.
pub(crate) fn realise_cuts(host: &PhyloNetwork, cuts: &[Cut]) -> AgreementEmbedding {
    let hg = host.graph();
    let nv = hg.vertex_count();
    let mut tail_at: Vec<u32> = hg.edges.iter().map(|e| e.0).collect();
    let mut head_at: Vec<u32> = hg.edges.iter().map(|e| e.1).collect();
    let mut labels = hg.labels.clone();
    let mut host_of: Vec<u32> = (0..nv as u32).collect();
    for &(w, e) in cuts {
        let s = labels.len() as u32;
        labels.push(None);
        host_of.push(w);
        let (t, h) = hg.edges[e as usize];
        if t == w && tail_at[e as usize] == w {
            tail_at[e as usize] = s;
        } else {
            debug_assert_eq!(h, w);
            head_at[e as usize] = s;
        }
    }
    let total = labels.len();
    let mut indeg = vec![0usize; total];
    let mut outdeg = vec![0usize; total];
    let mut next = vec![u32::MAX; total];
    for e in 0..hg.edge_count() {
        outdeg[tail_at[e] as usize] += 1;
        indeg[head_at[e] as usize] += 1;
        next[tail_at[e] as usize] = e as u32;
    }
    let suppressed: Vec<bool> = (0..total)
        .map(|v| labels[v].is_none() && indeg[v] == 1 && outdeg[v] == 1)
        .collect();
    let mut new_id = vec![u32::MAX; total];
    let mut glabels = Vec::new();
    let mut vertex_map = Vec::new();
    for v in 0..total {
        if !suppressed[v] {
            new_id[v] = glabels.len() as u32;
            glabels.push(labels[v]);
            vertex_map.push(VertexId(host_of[v]));
        }
    }
    let mut gedges = Vec::new();
    let mut edge_map = Vec::new();
    for e in 0..hg.edge_count() {
        if suppressed[tail_at[e] as usize] {
            continue;
        }
        let mut path = vec![EdgeId(e as u32)];
        let mut cur = e;
        while suppressed[head_at[cur] as usize] {
            cur = next[head_at[cur] as usize] as usize;
            path.push(EdgeId(cur as u32));
        }
        gedges.push((new_id[tail_at[e] as usize], new_id[head_at[cur] as usize]));
        edge_map.push(path);
    }
    let guest = PrunedGraph::from_graph(host.taxa().clone(), Multigraph::new(glabels, gedges));
    AgreementEmbedding {
        host: host.clone(),
        guest,
        vertex_map,
        edge_map,
    }
}

/// All cuts that may extend `cuts`.
fn extensions(host: &PhyloNetwork, cuts: &[Cut]) -> Vec<Cut> {
    let hg = host.graph();
    let used: HashSet<u32> = cuts.iter().map(|c| c.0).collect();
    let mut out = Vec::new();
    for w in 0..hg.vertex_count() as u32 {
        if used.contains(&w) {
            continue;
        }
        for &e in hg.inc[w as usize].iter().chain(hg.out[w as usize].iter()) {
            out.push((w, e));
        }
    }
    out
}

/// Isomorphism classes of graphs reachable from a network by exactly `k`
/// prunings, one cut set per class, in discovery order.
#[derive(Clone, Debug)]
pub(crate) struct PruningLevel {
    pub k: usize,
    pub reps: Vec<(CanonicalKey, Vec<Cut>)>,
}

impl PruningLevel {
    pub fn start(host: &PhyloNetwork) -> Self {
        PruningLevel {
            k: 0,
            reps: vec![(host.canonical_key(), Vec::new())],
        }
    }

    /// Next level; `budget` bounds the number of classes kept.
    pub fn next(&self, host: &PhyloNetwork, budget: usize) -> Result<Self, AgreementError> {
        let candidates: Vec<Vec<Cut>> = {
            let mut seen: HashSet<Vec<Cut>> = HashSet::new();
            let mut c = Vec::new();
            for (_, cuts) in &self.reps {
                for ext in extensions(host, cuts) {
                    let mut nc = cuts.clone();
                    nc.push(ext);
                    nc.sort_unstable();
                    if seen.insert(nc.clone()) {
                        c.push(nc);
                    }
                }
            }
            c
        };
        let keys: Vec<CanonicalKey> = candidates
            .par_iter()
            .map(|cuts| realise_cuts(host, cuts).guest.canonical_key())
            .collect();
        let mut index: HashMap<CanonicalKey, ()> = HashMap::new();
        let mut reps = Vec::new();
        for (key, cuts) in keys.into_iter().zip(candidates) {
            if index.insert(key.clone(), ()).is_none() {
                reps.push((key, cuts));
                if reps.len() > budget {
                    return Err(AgreementError::BudgetExceeded(budget));
                }
            }
        }
        Ok(PruningLevel {
            k: self.k + 1,
            reps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_enewick;

    #[test]
    fn single_leaf_has_two_prunings() {
        let n = parse_enewick("1;").unwrap();
        let g = PrunedGraph::from_network(&n);
        assert_eq!(enumerate_prunings(&g).len(), 2);
        for p in enumerate_prunings(&g) {
            let h = apply_pruning(&g, p).unwrap();
            assert_eq!(h.sprout_count(), 1);
            assert!(h.validate().ok);
        }
    }

    #[test]
    fn pendant_pruning_splits_off_the_leaf() {
        let n = parse_enewick("((1,2),3);").unwrap();
        let g = PrunedGraph::from_network(&n);
        let leaf1 = n.leaf(0).unwrap();
        let e = n.in_edges(leaf1).next().unwrap();
        let h = apply_pruning(&g, Pruning::at_tail(e)).unwrap();
        assert_eq!(h.sprout_count(), 1);
        assert_eq!(h.components().0, 2);
        assert_eq!(h.edge_count(), 4);
    }

    #[test]
    fn cuts_match_sequential_prunings() {
        let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
        let g = PrunedGraph::from_network(&n);
        for p in enumerate_prunings(&g) {
            let seq = apply_pruning(&g, p).unwrap();
            let (u, v) = n.endpoints(p.edge);
            let w = if p.end == PruneEnd::Tail { u } else { v };
            let cut = realise_cuts(&n, &[(w.0, p.edge.0)]);
            assert_eq!(seq.canonical_key(), cut.guest.canonical_key());
        }
    }
}
