//! The agreement distance by levelwise pruning enumeration.

use std::collections::HashMap;

use log::debug;

use crate::canonical::{isomorphism, Canonical, CanonicalKey};
use crate::error::AgreementError;
use crate::graph::{EdgeId, Multigraph, VertexId};
use crate::network::PhyloNetwork;
use crate::pruned::PrunedGraph;

use super::embedding::AgreementEmbedding;
use super::graph::AgreementGraph;
use super::pruning::{realise_cuts, PruningLevel};

#[derive(Clone, Copy, Debug)]
pub struct AgreementOptions {
    /// Largest number of isomorphism classes kept on one pruning level.
    pub budget: usize,
}

impl Default for AgreementOptions {
    fn default() -> Self {
        AgreementOptions { budget: 2_000_000 }
    }
}

/// The distance `d = s + l` with a maximum agreement graph and embeddings
/// into both networks.
#[derive(Clone, Debug)]
pub struct AgreementDistance {
    pub d: usize,
    pub s: usize,
    pub l: usize,
    pub graph: AgreementGraph,
    pub embedding_n: AgreementEmbedding,
    pub embedding_nprime: AgreementEmbedding,
}

pub fn agreement_distance(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
) -> Result<AgreementDistance, AgreementError> {
    agreement_distance_with(n, np, AgreementOptions::default())
}

/// Single-edge components between two sprouts, by edge id.
fn loose_edges(g: &PrunedGraph) -> Vec<EdgeId> {
    g.edges()
        .filter(|&e| {
            let (u, v) = g.endpoints(e);
            g.is_sprout(u) && g.is_sprout(v)
        })
        .collect()
}

/// Reorders an embedding so the listed edges and their endpoints come last.
fn move_to_end(e: &AgreementEmbedding, last: &[EdgeId]) -> AgreementEmbedding {
    let g = &e.guest;
    let tail_vertices: Vec<VertexId> = last
        .iter()
        .flat_map(|&x| {
            let (a, b) = g.endpoints(x);
            [a, b]
        })
        .collect();
    let mut vorder: Vec<VertexId> = g
        .vertices()
        .filter(|v| !tail_vertices.contains(v))
        .collect();
    vorder.extend(&tail_vertices);
    let mut eorder: Vec<EdgeId> = g.edges().filter(|x| !last.contains(x)).collect();
    eorder.extend(last);
    let mut new_v = vec![0u32; g.vertex_count()];
    for (i, v) in vorder.iter().enumerate() {
        new_v[v.index()] = i as u32;
    }
    let labels = vorder.iter().map(|&v| g.label(v)).collect();
    let edges = eorder
        .iter()
        .map(|&x| {
            let (a, b) = g.endpoints(x);
            (new_v[a.index()], new_v[b.index()])
        })
        .collect();
    AgreementEmbedding {
        host: e.host.clone(),
        guest: PrunedGraph::from_graph(g.taxa().clone(), Multigraph::new(labels, edges)),
        vertex_map: vorder.iter().map(|v| e.vertex_map[v.index()]).collect(),
        edge_map: eorder
            .iter()
            .map(|x| e.edge_map[x.index()].clone())
            .collect(),
    }
}

/// Computes the agreement distance. Graphs reachable from the network with
/// fewer reticulations by `s` prunings are compared with graphs reachable
/// from the other by `s + 2l` prunings after dropping `l` loose edges; the
/// first `s` with a common graph gives `d = s + l`.
pub fn agreement_distance_with(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    opts: AgreementOptions,
) -> Result<AgreementDistance, AgreementError> {
    if n.taxa().labels() != np.taxa().labels() {
        return Err(AgreementError::TaxaMismatch);
    }
    let swapped = n.reticulation_count() > np.reticulation_count();
    let (poor, rich) = if swapped { (np, n) } else { (n, np) };
    let l = rich.reticulation_count() - poor.reticulation_count();
    let mut a = PruningLevel::start(poor);
    let mut b = PruningLevel::start(rich);
    for _ in 0..2 * l {
        b = b.next(rich, opts.budget)?;
    }
    let max_s = poor.vertex_count();
    for s in 0..=max_s {
        if s > 0 {
            a = a.next(poor, opts.budget)?;
            b = b.next(rich, opts.budget)?;
        }
        debug!(
            "agreement level s={s}: {} and {} classes",
            a.reps.len(),
            b.reps.len()
        );
        let index: HashMap<&CanonicalKey, usize> = a
            .reps
            .iter()
            .enumerate()
            .map(|(i, (k, _))| (k, i))
            .collect();
        for (_, cuts) in &b.reps {
            let eb = realise_cuts(rich, cuts);
            let loose = loose_edges(&eb.guest);
            if loose.len() < l {
                continue;
            }
            let chosen: Vec<EdgeId> = loose[loose.len() - l..].to_vec();
            let full = move_to_end(&eb, &chosen);
            let ne = full.guest.edge_count();
            let graph = AgreementGraph::new(
                full.guest.clone(),
                (ne - l..ne).map(|x| EdgeId(x as u32)).collect(),
            )?;
            let (core, _, _) = graph.without_disagreement();
            let key = core.canonical_key();
            let Some(&ia) = index.get(&key) else {
                continue;
            };
            let ea = realise_cuts(poor, &a.reps[ia].1);
            let (vmap, emap) = isomorphism(&core.g, &ea.guest.g)
                .ok_or_else(|| AgreementError::Decomposition("isomorphism lost".into()))?;
            let into_poor = AgreementEmbedding {
                host: poor.clone(),
                guest: core,
                vertex_map: vmap.iter().map(|&v| ea.vertex_map[v as usize]).collect(),
                edge_map: emap
                    .iter()
                    .map(|&x| ea.edge_map[x as usize].clone())
                    .collect(),
            };
            debug_assert_eq!(graph.s(), s);
            let (embedding_n, embedding_nprime) = if swapped {
                (full, into_poor)
            } else {
                (into_poor, full)
            };
            return Ok(AgreementDistance {
                d: s + l,
                s,
                l,
                graph,
                embedding_n,
                embedding_nprime,
            });
        }
    }
    Err(AgreementError::Decomposition(
        "no agreement graph found within the pruning limit".into(),
    ))
}
