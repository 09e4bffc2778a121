//! Extended Newick input and output.
//!
//! Dialect: a reticulation is written `(child)#H<k>` at one occurrence and
//! `#H<k>` at the other, in either order. Internal node names and branch
//! lengths are rejected. The root `rho` is implicit: the outermost node of
//! the string becomes its only child.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::canonical::canonical_form;
use crate::error::ParseError;
use crate::graph::{Label, Multigraph};
use crate::network::{PhyloNetwork, VertexKind};
use crate::taxa::{TaxaSet, ROOT_LABEL};

enum NodeKind {
    Internal {
        children: Vec<usize>,
        tag: Option<String>,
    },
    Leaf(String),
    Reference(String),
}

struct Node {
    kind: NodeKind,
    offset: usize,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
}

fn is_label_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'_' | b'.' | b'-' | b'\'' | b'/' | b'|')
}

fn syntax(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        offset,
        message: message.into(),
    }
}

fn semantic(offset: usize, message: impl Into<String>) -> ParseError {
    ParseError::Semantic {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn describe(&self) -> String {
        match self.peek() {
            Some(b) => format!("'{}'", b as char),
            None => "end of input".to_string(),
        }
    }

    fn word(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.s.len() && is_label_byte(self.s[self.pos]) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.s[start..self.pos]).into_owned()
    }

    fn tag(&mut self) -> Result<String, ParseError> {
        let at = self.pos;
        self.pos += 1;
        let name = self.word();
        if name.is_empty() {
            return Err(syntax(at, "empty hybrid tag"));
        }
        Ok(name)
    }

    /// Rejects the annotations this dialect does not support.
    fn forbid_annotations(&self) -> Result<(), ParseError> {
        match self.peek() {
            Some(b':') => Err(syntax(self.pos, "branch lengths are not supported")),
            Some(b) if is_label_byte(b) => {
                Err(syntax(self.pos, "internal node names are not supported"))
            }
            _ => Ok(()),
        }
    }

    fn subtree(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let offset = self.pos;
        let kind = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let mut children = vec![self.subtree()?];
                loop {
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.pos += 1;
                            children.push(self.subtree()?);
                        }
                        Some(b')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => {
                            return Err(syntax(
                                self.pos,
                                format!("expected ',' or ')', found {}", self.describe()),
                            ))
                        }
                    }
                }
                self.skip_ws();
                let tag = if self.peek() == Some(b'#') {
                    Some(self.tag()?)
                } else {
                    None
                };
                self.skip_ws();
                self.forbid_annotations()?;
                NodeKind::Internal { children, tag }
            }
            Some(b'#') => {
                let t = self.tag()?;
                self.skip_ws();
                self.forbid_annotations()?;
                NodeKind::Reference(t)
            }
            Some(b) if is_label_byte(b) => {
                let w = self.word();
                self.skip_ws();
                match self.peek() {
                    Some(b'#') => return Err(syntax(self.pos, "a leaf cannot carry a hybrid tag")),
                    Some(b':') => return Err(syntax(self.pos, "branch lengths are not supported")),
                    _ => {}
                }
                NodeKind::Leaf(w)
            }
            _ => {
                return Err(syntax(
                    self.pos,
                    format!(
                        "expected '(', a label or a hybrid tag, found {}",
                        self.describe()
                    ),
                ))
            }
        };
        self.nodes.push(Node { kind, offset });
        Ok(self.nodes.len() - 1)
    }
}

fn parse_nodes(line: &str) -> Result<(Vec<Node>, usize), ParseError> {
    let mut p = Parser {
        s: line.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
    };
    let top = p.subtree()?;
    p.skip_ws();
    if p.peek() != Some(b';') {
        return Err(syntax(
            p.pos,
            format!("expected ';', found {}", p.describe()),
        ));
    }
    p.pos += 1;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(syntax(p.pos, "unexpected text after ';'"));
    }
    Ok((p.nodes, top))
}

/// Parses one line; the taxa set is the set of leaf labels in the line.
pub fn parse_enewick(line: &str) -> Result<PhyloNetwork, ParseError> {
    build(line, None)
}

/// Parses one line against a fixed taxa set; every taxon must occur.
pub fn parse_enewick_with_taxa(
    line: &str,
    taxa: &Arc<TaxaSet>,
) -> Result<PhyloNetwork, ParseError> {
    build(line, Some(taxa))
}

fn build(line: &str, taxa: Option<&Arc<TaxaSet>>) -> Result<PhyloNetwork, ParseError> {
    let (nodes, top) = parse_nodes(line)?;

    let mut leaf_names: Vec<(&str, usize)> = Vec::new();
    let mut defs: HashMap<&str, usize> = HashMap::new();
    let mut refs: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        match &n.kind {
            NodeKind::Leaf(w) => {
                if w == ROOT_LABEL {
                    return Err(semantic(
                        n.offset,
                        format!("'{ROOT_LABEL}' is reserved for the root"),
                    ));
                }
                leaf_names.push((w, n.offset));
            }
            NodeKind::Internal { children, tag } => {
                let want = if tag.is_some() { 1 } else { 2 };
                if children.len() != want {
                    let what = if tag.is_some() {
                        "reticulation"
                    } else {
                        "tree vertex"
                    };
                    return Err(semantic(
                        n.offset,
                        format!("{what} with {} children (expected {want})", children.len()),
                    ));
                }
                if let Some(t) = tag {
                    if defs.insert(t, i).is_some() {
                        return Err(semantic(n.offset, format!("hybrid tag #{t} defined twice")));
                    }
                }
            }
            NodeKind::Reference(t) => refs.entry(t).or_default().push(i),
        }
    }
    for (t, rs) in &refs {
        let Some(_) = defs.get(t) else {
            return Err(semantic(
                nodes[rs[0]].offset,
                format!("hybrid tag #{t} has no defining occurrence"),
            ));
        };
        if rs.len() != 1 {
            return Err(semantic(
                nodes[rs[1]].offset,
                format!("hybrid tag #{t} occurs {} times (expected 2)", rs.len() + 1),
            ));
        }
    }
    for (t, &d) in &defs {
        if !refs.contains_key(t) {
            return Err(semantic(
                nodes[d].offset,
                format!("hybrid tag #{t} occurs once (expected 2)"),
            ));
        }
    }

    let taxa: Arc<TaxaSet> = match taxa {
        Some(t) => t.clone(),
        None => {
            let mut names: Vec<&str> = leaf_names.iter().map(|x| x.0).collect();
            names.sort_unstable();
            if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
                let off = leaf_names.iter().filter(|x| x.0 == w[0]).nth(1).unwrap().1;
                return Err(semantic(off, format!("duplicate taxon '{}'", w[0])));
            }
            Arc::new(TaxaSet::new(names).map_err(|e| semantic(0, e.to_string()))?)
        }
    };

    // Vertex 0 is rho; every non-reference node gets a vertex.
    let mut vid = vec![u32::MAX; nodes.len()];
    let mut labels = vec![Some(Label::Root)];
    let mut seen = vec![false; taxa.len()];
    for (i, n) in nodes.iter().enumerate() {
        match &n.kind {
            NodeKind::Reference(_) => continue,
            NodeKind::Leaf(w) => {
                let Some(t) = taxa.index_of(w) else {
                    return Err(semantic(n.offset, format!("unknown taxon '{w}'")));
                };
                if std::mem::replace(&mut seen[t as usize], true) {
                    return Err(semantic(n.offset, format!("duplicate taxon '{w}'")));
                }
                labels.push(Some(Label::Taxon(t)));
            }
            NodeKind::Internal { .. } => labels.push(None),
        }
        vid[i] = (labels.len() - 1) as u32;
    }
    if let Some(t) = seen.iter().position(|s| !s) {
        return Err(semantic(
            0,
            format!("taxon '{}' does not occur", taxa.label(t as u32)),
        ));
    }
    let target = |i: usize| -> u32 {
        match &nodes[i].kind {
            NodeKind::Reference(t) => vid[defs[t.as_str()]],
            _ => vid[i],
        }
    };
    if let NodeKind::Reference(_) = nodes[top].kind {
        return Err(semantic(
            nodes[top].offset,
            "the outermost node cannot be a hybrid reference",
        ));
    }
    let mut edges = vec![(0u32, vid[top])];
    for (i, n) in nodes.iter().enumerate() {
        if let NodeKind::Internal { children, .. } = &n.kind {
            for &c in children {
                edges.push((vid[i], target(c)));
            }
        }
    }
    let net = PhyloNetwork::from_graph(taxa, Multigraph::new(labels, edges));
    let report = net.validate();
    if !report.ok {
        let message = if report.has_rule("acyclic") {
            "cyclic hybrid reference".to_string()
        } else {
            report.to_string()
        };
        return Err(semantic(nodes[top].offset, message));
    }
    Ok(net)
}

/// Deterministic serialisation: children are ordered by canonical position,
/// hybrid tags are numbered by first occurrence.
pub fn write_enewick(n: &PhyloNetwork) -> String {
    let g = n.graph();
    let (_, order) = canonical_form(g);
    let mut pos = vec![0u32; g.vertex_count()];
    for (p, &v) in order.iter().enumerate() {
        pos[v as usize] = p as u32;
    }
    let mut tags: HashMap<u32, usize> = HashMap::new();
    let mut out = String::new();
    let root = n.root().0;
    let top = g.edges[g.out[root as usize][0] as usize].1;
    write_vertex(n, top, &pos, &mut tags, &mut out);
    out.push(';');
    out
}

fn write_vertex(
    n: &PhyloNetwork,
    v: u32,
    pos: &[u32],
    tags: &mut HashMap<u32, usize>,
    out: &mut String,
) {
    let g = n.graph();
    let mut children: Vec<u32> = g.out[v as usize]
        .iter()
        .map(|&e| g.edges[e as usize].1)
        .collect();
    children.sort_by_key(|&c| pos[c as usize]);
    match n.kind(crate::graph::VertexId(v)) {
        VertexKind::Leaf(t) => out.push_str(n.taxa().label(t)),
        VertexKind::Reticulation => {
            if let Some(k) = tags.get(&v) {
                let _ = write!(out, "#H{k}");
                return;
            }
            let k = tags.len() + 1;
            tags.insert(v, k);
            out.push('(');
            write_vertex(n, children[0], pos, tags, out);
            let _ = write!(out, ")#H{k}");
        }
        _ => {
            out.push('(');
            for (i, &c) in children.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_vertex(n, c, pos, tags, out);
            }
            out.push(')');
        }
    }
}

/// One parsed line of a document.
pub type DocumentLine = (usize, Result<PhyloNetwork, ParseError>);

/// Parses a document: one network per line, blank lines and lines starting
/// with `#` are skipped. Line numbers are one-based.
pub fn parse_document(text: &str) -> Vec<DocumentLine> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| (i + 1, parse_enewick(l)))
        .collect()
}
