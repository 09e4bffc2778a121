//! Agreement graphs, their certification and normalised embeddings.

use std::sync::Arc;

use crate::error::AgreementError;
use crate::graph::{EdgeId, VertexId};
use crate::network::{PhyloNetwork, ValidationReport};
use crate::pruned::PrunedGraph;

use super::embedding::{
    embedding_change, find_agreement_embedding, AgreementEmbedding, Attachment,
};

/// A pruned graph split into agreement subgraphs and disagreement edges.
#[derive(Clone, Debug)]
pub struct AgreementGraph {
    pub graph: PrunedGraph,
    /// `E_1, ..., E_l` in order.
    pub disagreement: Vec<EdgeId>,
}

impl AgreementGraph {
    /// Checks that each listed edge forms a component of its own with two
    /// unlabelled endpoints.
    pub fn new(graph: PrunedGraph, disagreement: Vec<EdgeId>) -> Result<Self, AgreementError> {
        let (_, comp) = graph.components();
        for (i, &e) in disagreement.iter().enumerate() {
            if e.index() >= graph.edge_count() || disagreement[..i].contains(&e) {
                return Err(AgreementError::Decomposition(format!(
                    "bad disagreement edge {e}"
                )));
            }
            let (u, v) = graph.endpoints(e);
            let alone = graph
                .edges()
                .filter(|&f| comp[graph.endpoints(f).0.index()] == comp[u.index()])
                .count()
                == 1;
            if !(graph.is_sprout(u) && graph.is_sprout(v) && alone) {
                return Err(AgreementError::Decomposition(format!(
                    "{e} is not a single-edge component between sprouts"
                )));
            }
        }
        Ok(AgreementGraph {
            graph,
            disagreement,
        })
    }

    pub fn l(&self) -> usize {
        self.disagreement.len()
    }

    fn disagreement_vertex(&self, v: VertexId) -> bool {
        self.disagreement.iter().any(|&e| {
            let (a, b) = self.graph.endpoints(e);
            a == v || b == v
        })
    }

    /// Sprouts of the agreement subgraphs.
    pub fn s(&self) -> usize {
        self.graph
            .vertices()
            .filter(|&v| self.graph.is_sprout(v) && !self.disagreement_vertex(v))
            .count()
    }

    /// The graph without its disagreement edges and their endpoints, with
    /// old-to-new vertex and edge maps.
    pub fn without_disagreement(&self) -> (PrunedGraph, Vec<Option<u32>>, Vec<Option<u32>>) {
        let keep_v: Vec<bool> = self
            .graph
            .vertices()
            .map(|v| !self.disagreement_vertex(v))
            .collect();
        let keep_e: Vec<bool> = self
            .graph
            .edges()
            .map(|e| !self.disagreement.contains(&e))
            .collect();
        self.graph.restrict(&keep_v, &keep_e)
    }

    /// Vertex sets of the agreement subgraphs, ordered by smallest vertex.
    pub fn agreement_subgraphs(&self) -> Vec<Vec<VertexId>> {
        let (k, comp) = self.graph.components();
        let mut out: Vec<Vec<VertexId>> = vec![Vec::new(); k];
        for v in self.graph.vertices() {
            if !self.disagreement_vertex(v) {
                out[comp[v.index()]].push(v);
            }
        }
        out.retain(|c| !c.is_empty());
        out
    }
}

/// Embeddings witnessing an agreement graph: the one into the network with
/// fewer reticulations has the graph without disagreement edges as guest.
#[derive(Clone, Debug)]
pub struct AgreementCertificate {
    pub embedding_n: AgreementEmbedding,
    pub embedding_nprime: AgreementEmbedding,
}

fn check_pair(n: &PhyloNetwork, np: &PhyloNetwork) -> Result<(), AgreementError> {
    if n.taxa().labels() != np.taxa().labels() {
        return Err(AgreementError::TaxaMismatch);
    }
    Ok(())
}

/// Searches for both embeddings required of an agreement graph for `n` and
/// `np`; `None` if one of them does not exist or `l` is not the difference
/// of reticulation numbers.
pub fn certify_agreement_graph(
    g: &AgreementGraph,
    n: &PhyloNetwork,
    np: &PhyloNetwork,
) -> Result<Option<AgreementCertificate>, AgreementError> {
    check_pair(n, np)?;
    if g.graph.taxa().labels() != n.taxa().labels() {
        return Ok(None);
    }
    let (r, rp) = (n.reticulation_count(), np.reticulation_count());
    if g.l() != r.abs_diff(rp) {
        return Ok(None);
    }
    let (core, _, _) = g.without_disagreement();
    let (poor, rich) = if r <= rp { (n, np) } else { (np, n) };
    let Some(into_poor) = find_agreement_embedding(&core, poor) else {
        return Ok(None);
    };
    let Some(into_rich) = find_agreement_embedding(&g.graph, rich) else {
        return Ok(None);
    };
    Ok(Some(if r <= rp {
        AgreementCertificate {
            embedding_n: into_poor,
            embedding_nprime: into_rich,
        }
    } else {
        AgreementCertificate {
            embedding_n: into_rich,
            embedding_nprime: into_poor,
        }
    }))
}

pub fn is_agreement_graph(
    g: &AgreementGraph,
    n: &PhyloNetwork,
    np: &PhyloNetwork,
) -> Result<bool, AgreementError> {
    Ok(certify_agreement_graph(g, n, np)?.is_some())
}

/// Checks given witnesses without searching: both embeddings verify, their
/// guests are the graph and the graph without disagreement edges, and `l`
/// matches.
pub fn verify_agreement_witness(
    g: &AgreementGraph,
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    cert: &AgreementCertificate,
) -> ValidationReport {
    use crate::canonical::Canonical;
    let mut rep = ValidationReport::new();
    let (r, rp) = (n.reticulation_count(), np.reticulation_count());
    if g.l() != r.abs_diff(rp) {
        rep.push(
            "decomposition",
            format!("l = {} but |r - r'| = {}", g.l(), r.abs_diff(rp)),
        );
    }
    let (core, _, _) = g.without_disagreement();
    let (poor_e, rich_e, poor, rich) = if r <= rp {
        (&cert.embedding_n, &cert.embedding_nprime, n, np)
    } else {
        (&cert.embedding_nprime, &cert.embedding_n, np, n)
    };
    for (emb, guest, host, name) in [
        (poor_e, &core, poor, "poorer"),
        (rich_e, &g.graph, rich, "richer"),
    ] {
        if emb.guest.canonical_key() != guest.canonical_key() {
            rep.push(
                "guest",
                format!("embedding into the {name} network has the wrong guest"),
            );
        }
        if emb.host.canonical_key() != host.canonical_key() {
            rep.push(
                "host",
                format!("embedding into the {name} network has the wrong host"),
            );
        }
        let v = emb.verify();
        for x in v.violations {
            rep.push(&x.rule, format!("{name}: {}", x.detail));
        }
    }
    rep
}

/// Reports where an embedding of the full agreement graph fails the three
/// normal-form properties: `sprout` (an agreement-subgraph sprout attached
/// to a disagreement edge) and `order` (`E_i` attached to `E_j` with
/// `j >= i`).
pub fn normal_form_violations(g: &AgreementGraph, e: &AgreementEmbedding) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let index_of = |edge: EdgeId| g.disagreement.iter().position(|&x| x == edge);
    for v in g.graph.vertices() {
        if !g.graph.is_sprout(v) {
            continue;
        }
        let Attachment::Edge { edge, .. } = e.attachment(v) else {
            continue;
        };
        let Some(j) = index_of(edge) else {
            continue;
        };
        match g.disagreement.iter().position(|&x| {
            let (a, b) = g.graph.endpoints(x);
            a == v || b == v
        }) {
            None => rep.push(
                "sprout",
                format!("{v} is attached to disagreement edge {edge}"),
            ),
            Some(i) if j >= i => {
                rep.push("order", format!("E_{} is attached to E_{}", i + 1, j + 1))
            }
            Some(_) => {}
        }
    }
    rep
}

/// Changes an embedding of the full agreement graph into the richer network
/// so that no agreement-subgraph sprout is attached to a disagreement edge
/// and `E_i` is attached to `E_j` only for `j < i`. Without disagreement
/// edges the embedding is returned unchanged.
pub fn normalize_embedding(
    g: &AgreementGraph,
    host: &PhyloNetwork,
    e: &AgreementEmbedding,
) -> Result<AgreementEmbedding, AgreementError> {
    let fail = |m: String| Err(AgreementError::Normalization(m));
    if e.guest.vertex_count() != g.graph.vertex_count()
        || e.guest.edge_count() != g.graph.edge_count()
        || !Arc::ptr_eq(e.host.taxa(), host.taxa())
            && e.host.taxa().labels() != host.taxa().labels()
    {
        return fail("embedding does not belong to this graph and host".into());
    }
    let report = e.verify();
    if !report.ok {
        return fail(format!("embedding is invalid: {report}"));
    }
    if g.l() == 0 {
        return Ok(e.clone());
    }
    let limit = host.edge_count() + 1;
    let same_end = |sprout: VertexId, edge: EdgeId| {
        let (a, b) = g.graph.endpoints(edge);
        if g.graph.out_edges(sprout).next().is_some() {
            a
        } else {
            b
        }
    };
    let mut cur = e.clone();
    let s_sprouts: Vec<VertexId> = g
        .graph
        .vertices()
        .filter(|&v| g.graph.is_sprout(v) && !g.disagreement_vertex(v))
        .collect();
    for u in s_sprouts {
        let mut steps = 0;
        while let Attachment::Edge { edge, .. } = cur.attachment(u) {
            if !g.disagreement.contains(&edge) {
                break;
            }
            steps += 1;
            if steps > limit {
                return fail(format!("{u} does not settle"));
            }
            cur = embedding_change(&cur, u, same_end(u, edge))?;
        }
    }
    for i in 0..g.l() {
        let (a, b) = g.graph.endpoints(g.disagreement[i]);
        for u in [a, b] {
            let mut steps = 0;
            while let Attachment::Edge { edge, .. } = cur.attachment(u) {
                match g.disagreement.iter().position(|&x| x == edge) {
                    Some(j) if j > i => {}
                    _ => break,
                }
                steps += 1;
                if steps > limit {
                    return fail(format!("{u} does not settle"));
                }
                cur = embedding_change(&cur, u, same_end(u, edge))?;
            }
        }
    }
    Ok(cur)
}
