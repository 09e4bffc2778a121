//! Graphviz export.

use std::fmt::Write;

use crate::graph::{Label, Multigraph};
use crate::network::PhyloNetwork;
use crate::pruned::PrunedGraph;
use crate::taxa::{TaxaSet, ROOT_LABEL};

fn write_graph(g: &Multigraph, taxa: &TaxaSet) -> String {
    let mut s = String::from("digraph {\n");
    for v in 0..g.vertex_count() {
        let (i, o) = (g.indeg(v as u32), g.outdeg(v as u32));
        let attrs = match g.labels[v] {
            Some(Label::Root) => format!("label=\"{ROOT_LABEL}\", shape=plaintext"),
            Some(Label::Taxon(t)) => format!("label=\"{}\", shape=plaintext", taxa.label(t)),
            None if i >= 2 => "label=\"\", shape=box, style=filled, fillcolor=lightgrey".into(),
            None if i + o == 1 => "label=\"\", shape=circle, width=0.08, style=filled".into(),
            None => "label=\"\", shape=point".into(),
        };
        writeln!(s, "  v{v} [{attrs}];").unwrap();
    }
    for (e, &(t, h)) in g.edges.iter().enumerate() {
        let style = if g.indeg(h) >= 2 {
            ", style=dashed"
        } else {
            ""
        };
        writeln!(s, "  v{t} -> v{h} [label=\"e{e}\"{style}];").unwrap();
    }
    s.push_str("}\n");
    s
}

/// DOT text with one edge statement per edge; reticulation edges are dashed.
pub fn network_to_dot(n: &PhyloNetwork) -> String {
    write_graph(n.graph(), n.taxa())
}

/// DOT text for a pruned graph; sprouts are drawn as small unlabelled dots.
pub fn pruned_to_dot(p: &PrunedGraph) -> String {
    write_graph(&p.g, p.taxa())
}
