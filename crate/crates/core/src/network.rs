//! Rooted binary phylogenetic networks.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::NetworkError;
use crate::graph::{EdgeId, Label, Multigraph, VertexId};
use crate::taxa::TaxaSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum VertexKind {
    Root,
    Leaf(u32),
    InnerTree,
    Reticulation,
}

/// One failed invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: String,
    pub detail: String,
}

/// Outcome of a report-style check.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn new() -> Self {
        ValidationReport {
            ok: true,
            violations: Vec::new(),
        }
    }

    pub fn push(&mut self, rule: &str, detail: impl Into<String>) {
        self.ok = false;
        self.violations.push(Violation {
            rule: rule.to_string(),
            detail: detail.into(),
        });
    }

    pub fn has_rule(&self, rule: &str) -> bool {
        self.violations.iter().any(|v| v.rule == rule)
    }

    pub fn merge(&mut self, other: ValidationReport) {
        for v in other.violations {
            self.push(&v.rule, v.detail);
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", v.rule, v.detail)?;
        }
        Ok(())
    }
}

/// A rooted binary phylogenetic network: a directed acyclic multigraph with
/// a root of out-degree one, labelled leaves, inner tree vertices and
/// reticulations.
///
/// Values are immutable; operations return new networks. Vertex and edge ids
/// are dense and refer to this value only.
#[derive(Clone, Debug)]
pub struct PhyloNetwork {
    taxa: Arc<TaxaSet>,
    pub(crate) g: Multigraph,
    kinds: Vec<VertexKind>,
}

fn derive_kind(label: Option<Label>, indeg: usize) -> VertexKind {
    match label {
        Some(Label::Root) => VertexKind::Root,
        Some(Label::Taxon(t)) => VertexKind::Leaf(t),
        None if indeg >= 2 => VertexKind::Reticulation,
        None => VertexKind::InnerTree,
    }
}

impl PhyloNetwork {
    /// Builds a network from raw parts without checking the network
    /// invariants; use [`PhyloNetwork::validate`] to inspect the result.
    /// Fails only when an id or taxon index does not resolve.
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
        for l in labels.iter().flatten() {
            if let Label::Taxon(t) = l {
                if *t as usize >= taxa.len() {
                    return Err(NetworkError::DanglingId(format!("taxon index {t}")));
                }
            }
        }
        Ok(Self::from_graph(taxa, Multigraph::new(labels, edges)))
    }

    /// Builds and validates a network.
    pub fn new(
        taxa: Arc<TaxaSet>,
        labels: Vec<Option<Label>>,
        edges: Vec<(u32, u32)>,
    ) -> Result<Self, NetworkError> {
        let net = Self::from_raw(taxa, labels, edges)?;
        let report = net.validate();
        if report.ok {
            Ok(net)
        } else {
            Err(NetworkError::Invalid(report))
        }
    }

    pub(crate) fn from_graph(taxa: Arc<TaxaSet>, g: Multigraph) -> Self {
        let kinds = (0..g.vertex_count())
            .map(|v| derive_kind(g.labels[v], g.indeg(v as u32)))
            .collect();
        PhyloNetwork { taxa, g, kinds }
    }

    /// The two-vertex graph `rho -> taxon`. Valid only on a one-element
    /// taxa set; otherwise a seed for leaf insertion.
    pub fn single_leaf(taxa: Arc<TaxaSet>, taxon: u32) -> Self {
        let g = Multigraph::new(
            vec![Some(Label::Root), Some(Label::Taxon(taxon))],
            vec![(0, 1)],
        );
        Self::from_graph(taxa, g)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::new();
        let g = &self.g;
        let roots: Vec<usize> = (0..g.vertex_count())
            .filter(|&v| g.labels[v] == Some(Label::Root))
            .collect();
        if roots.len() != 1 {
            rep.push("root", format!("expected one root, found {}", roots.len()));
        }
        for &r in &roots {
            let (i, o) = (g.indeg(r as u32), g.outdeg(r as u32));
            if i != 0 || o != 1 {
                rep.push(
                    "root",
                    format!("root v{r} has in-degree {i}, out-degree {o}"),
                );
            }
        }
        let mut seen = vec![0usize; self.taxa.len()];
        for v in 0..g.vertex_count() {
            let (i, o) = (g.indeg(v as u32), g.outdeg(v as u32));
            match g.labels[v] {
                Some(Label::Root) => {}
                Some(Label::Taxon(t)) => {
                    seen[t as usize] += 1;
                    if (i, o) != (1, 0) {
                        rep.push(
                            "degree profile",
                            format!("leaf v{v} has in-degree {i}, out-degree {o}"),
                        );
                    }
                }
                None => {
                    if (i, o) != (1, 2) && (i, o) != (2, 1) {
                        rep.push(
                            "degree profile",
                            format!("vertex v{v} has in-degree {i}, out-degree {o}"),
                        );
                    }
                }
            }
        }
        for (t, &c) in seen.iter().enumerate() {
            if c != 1 {
                rep.push(
                    "taxa",
                    format!("taxon '{}' labels {c} vertices", self.taxa.label(t as u32)),
                );
            }
        }
        if !g.is_acyclic() {
            rep.push("acyclic", "the digraph has a directed cycle");
        }
        if roots.len() == 1 {
            let reach = g.reach_down(roots[0] as u32);
            if let Some(v) = reach.iter().position(|&r| !r) {
                rep.push(
                    "reachability",
                    format!("vertex v{v} is not reachable from the root"),
                );
            }
        }
        rep
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

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v.index()]
    }

    pub fn label(&self, v: VertexId) -> Option<Label> {
        self.g.labels[v.index()]
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.g.out[v.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.g.inc[v.index()].iter().map(|&e| EdgeId(e))
    }

    pub fn root(&self) -> VertexId {
        VertexId(
            self.kinds
                .iter()
                .position(|k| *k == VertexKind::Root)
                .expect("network has a root") as u32,
        )
    }

    pub fn leaf(&self, taxon: u32) -> Option<VertexId> {
        self.kinds
            .iter()
            .position(|k| *k == VertexKind::Leaf(taxon))
            .map(|v| VertexId(v as u32))
    }

    pub fn reticulation_count(&self) -> usize {
        self.kinds
            .iter()
            .filter(|k| **k == VertexKind::Reticulation)
            .count()
    }

    pub fn is_tree(&self) -> bool {
        self.reticulation_count() == 0
    }

    /// `true` if a directed path of length >= 1 leads from `a` to `b`.
    pub fn is_proper_ancestor(&self, a: VertexId, b: VertexId) -> bool {
        a != b && self.g.reach_down(a.0)[b.index()]
    }

    pub(crate) fn graph(&self) -> &Multigraph {
        &self.g
    }
}

impl fmt::Display for PhyloNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::newick::write_enewick(self))
    }
}
