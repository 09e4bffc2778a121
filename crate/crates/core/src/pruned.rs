//! Graphs obtained from networks by prunings.

use std::sync::Arc;

use serde::Serialize;

use crate::error::NetworkError;
use crate::graph::{EdgeId, Label, Multigraph, VertexId};
use crate::network::{PhyloNetwork, ValidationReport};
use crate::taxa::TaxaSet;

/// Role of a vertex in a pruned graph, read off its label and degrees.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexClass {
    /// Labelled root, out-degree zero or one.
    Root,
    /// Labelled leaf, in-degree zero or one.
    Leaf(u32),
    /// Unlabelled `(0, 1)` vertex.
    TailSprout,
    /// Unlabelled `(1, 0)` vertex.
    HeadSprout,
    /// Unlabelled `(0, 2)` vertex.
    SplitRemnant,
    /// Unlabelled `(2, 0)` vertex.
    MergeRemnant,
    /// Unlabelled `(1, 2)` vertex.
    Tree,
    /// Unlabelled `(2, 1)` vertex.
    Reticulation,
    /// Any other degree profile.
    Invalid,
}

impl VertexClass {
    pub fn is_sprout(self) -> bool {
        matches!(self, VertexClass::TailSprout | VertexClass::HeadSprout)
    }

    pub fn is_remnant(self) -> bool {
        matches!(self, VertexClass::SplitRemnant | VertexClass::MergeRemnant)
    }
}

/// A directed multigraph whose vertices are sprouts, labelled vertices,
/// degree-two remnants and degree-three vertices.
#[derive(Clone, Debug)]
pub struct PrunedGraph {
    taxa: Arc<TaxaSet>,
    pub(crate) g: Multigraph,
}

impl PrunedGraph {
    pub fn from_raw(
        taxa: Arc<TaxaSet>,
        labels: Vec<Option<Label>>,
        edges: Vec<(u32, u32)>,
    ) -> Result<Self, NetworkError> {
        let n = labels.len() as u32;
        if let Some(&(t, h)) = edges.iter().find(|&&(t, h)| t >= n || h >= n) {
            return Err(NetworkError::DanglingId(format!(
                "edge ({t}, {h}) with {n} vertices"
            )));
        }
        Ok(PrunedGraph {
            taxa,
            g: Multigraph::new(labels, edges),
        })
    }

    pub(crate) fn from_graph(taxa: Arc<TaxaSet>, g: Multigraph) -> Self {
        PrunedGraph { taxa, g }
    }

    /// The network itself, viewed as a pruned graph with no prunings.
    pub fn from_network(n: &PhyloNetwork) -> Self {
        PrunedGraph {
            taxa: n.taxa().clone(),
            g: n.graph().clone(),
        }
    }

    pub fn taxa(&self) -> &Arc<TaxaSet> {
        &self.taxa
    }

    pub fn vertex_count(&self) -> usize {
        self.g.vertex_count()
    }

    pub fn edge_count(&self) -> usize {
        self.g.edge_count()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.g.vertex_count() as u32).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.g.edge_count() as u32).map(EdgeId)
    }

    pub fn endpoints(&self, e: EdgeId) -> (VertexId, VertexId) {
        let (t, h) = self.g.edges[e.index()];
        (VertexId(t), VertexId(h))
    }

    pub fn label(&self, v: VertexId) -> Option<Label> {
        self.g.labels[v.index()]
    }

    pub fn indegree(&self, v: VertexId) -> usize {
        self.g.indeg(v.0)
    }

    pub fn outdegree(&self, v: VertexId) -> usize {
        self.g.outdeg(v.0)
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.g.out[v.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.g.inc[v.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn class(&self, v: VertexId) -> VertexClass {
        let (i, o) = (self.g.indeg(v.0), self.g.outdeg(v.0));
        match self.g.labels[v.index()] {
            Some(Label::Root) if i == 0 && o <= 1 => VertexClass::Root,
            Some(Label::Taxon(t)) if i <= 1 && o == 0 => VertexClass::Leaf(t),
            Some(_) => VertexClass::Invalid,
            None => match (i, o) {
                (0, 1) => VertexClass::TailSprout,
                (1, 0) => VertexClass::HeadSprout,
                (0, 2) => VertexClass::SplitRemnant,
                (2, 0) => VertexClass::MergeRemnant,
                (1, 2) => VertexClass::Tree,
                (2, 1) => VertexClass::Reticulation,
                _ => VertexClass::Invalid,
            },
        }
    }

    pub fn is_sprout(&self, v: VertexId) -> bool {
        self.class(v).is_sprout()
    }

    pub fn sprout_count(&self) -> usize {
        self.vertices().filter(|&v| self.is_sprout(v)).count()
    }

    /// `true` for a labelled vertex without edges.
    pub fn is_isolated_labelled(&self, v: VertexId) -> bool {
        self.g.labels[v.index()].is_some() && self.g.indeg(v.0) + self.g.outdeg(v.0) == 0
    }

    /// Weakly connected components: `(count, component index per vertex)`.
    pub fn components(&self) -> (usize, Vec<usize>) {
        self.g.components()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let mut roots = 0;
        let mut seen = vec![0usize; self.taxa.len()];
        for v in self.vertices() {
            match self.g.labels[v.index()] {
                Some(Label::Root) => roots += 1,
                Some(Label::Taxon(t)) => match seen.get_mut(t as usize) {
                    Some(c) => *c += 1,
                    None => rep.push("labels", format!("unknown taxon index {t} at {v}")),
                },
                None => {}
            }
            if self.class(v) == VertexClass::Invalid {
                rep.push(
                    "degree profile",
                    format!(
                        "{v} has in-degree {}, out-degree {}",
                        self.g.indeg(v.0),
                        self.g.outdeg(v.0)
                    ),
                );
            }
        }
        if roots != 1 {
            rep.push(
                "labels",
                format!("expected one root-labelled vertex, found {roots}"),
            );
        }
        for (t, &c) in seen.iter().enumerate() {
            if c != 1 {
                rep.push(
                    "labels",
                    format!("taxon '{}' labels {c} vertices", self.taxa.label(t as u32)),
                );
            }
        }
        if !self.g.is_acyclic() {
            rep.push("acyclic", "the digraph has a directed cycle");
        }
        rep
    }

    /// Subgraph induced by the given edges and vertices, renumbered densely
    /// in their original order. Returns the graph and the old-to-new vertex
    /// and edge maps.
    pub(crate) fn restrict(
        &self,
        keep_vertex: &[bool],
        keep_edge: &[bool],
    ) -> (PrunedGraph, Vec<Option<u32>>, Vec<Option<u32>>) {
        let mut vmap = vec![None; self.vertex_count()];
        let mut labels = Vec::new();
        for v in 0..self.vertex_count() {
            if keep_vertex[v] {
                vmap[v] = Some(labels.len() as u32);
                labels.push(self.g.labels[v]);
            }
        }
        let mut emap = vec![None; self.edge_count()];
        let mut edges = Vec::new();
        for (i, &(t, h)) in self.g.edges.iter().enumerate() {
            if keep_edge[i] {
                emap[i] = Some(edges.len() as u32);
                edges.push((vmap[t as usize].unwrap(), vmap[h as usize].unwrap()));
            }
        }
        (
            PrunedGraph::from_graph(self.taxa.clone(), Multigraph::new(labels, edges)),
            vmap,
            emap,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_view_has_no_sprouts() {
        let taxa = Arc::new(TaxaSet::numbered(1));
        let n = PhyloNetwork::single_leaf(taxa, 0);
        let p = PrunedGraph::from_network(&n);
        assert!(p.validate().ok);
        assert_eq!(p.sprout_count(), 0);
        assert_eq!(p.class(VertexId(0)), VertexClass::Root);
    }

    #[test]
    fn classes_follow_degrees() {
        let taxa = Arc::new(TaxaSet::numbered(1));
        let labels = vec![Some(Label::Root), Some(Label::Taxon(0)), None, None];
        let p = PrunedGraph::from_raw(taxa, labels, vec![(2, 1), (3, 0)]).unwrap();
        assert_eq!(p.class(VertexId(2)), VertexClass::TailSprout);
        assert_eq!(p.class(VertexId(3)), VertexClass::TailSprout);
        assert!(!p.validate().ok);
    }
}
