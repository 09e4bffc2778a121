//! Directed multigraph storage shared by networks and pruned graphs.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Vertex label: the root or a taxon index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Root,
    Taxon(u32),
}

/// Immutable multigraph with dense ids and cached adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Multigraph {
    pub labels: Vec<Option<Label>>,
    pub edges: Vec<(u32, u32)>,
    pub out: Vec<Vec<u32>>,
    pub inc: Vec<Vec<u32>>,
}

impl Multigraph {
    /// Caller guarantees every endpoint is `< labels.len()`.
    pub fn new(labels: Vec<Option<Label>>, edges: Vec<(u32, u32)>) -> Self {
        let n = labels.len();
        let mut out = vec![Vec::with_capacity(2); n];
        let mut inc = vec![Vec::with_capacity(2); n];
        for (i, &(t, h)) in edges.iter().enumerate() {
            out[t as usize].push(i as u32);
            inc[h as usize].push(i as u32);
        }
        Multigraph {
            labels,
            edges,
            out,
            inc,
        }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn indeg(&self, v: u32) -> usize {
        self.inc[v as usize].len()
    }

    #[inline]
    pub fn outdeg(&self, v: u32) -> usize {
        self.out[v as usize].len()
    }

    /// Kahn order; `None` if the graph has a directed cycle.
    pub fn topo_order(&self) -> Option<Vec<u32>> {
        let n = self.vertex_count();
        let mut indeg: Vec<usize> = self.inc.iter().map(Vec::len).collect();
        let mut stack: Vec<u32> = (0..n as u32).filter(|&v| indeg[v as usize] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = stack.pop() {
            order.push(v);
            for &e in &self.out[v as usize] {
                let h = self.edges[e as usize].1 as usize;
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    stack.push(h as u32);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_some()
    }

    /// Vertices reachable from `v` by a directed path of length >= 0.
    pub fn reach_down(&self, v: u32) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![v];
        seen[v as usize] = true;
        while let Some(x) = stack.pop() {
            for &e in &self.out[x as usize] {
                let h = self.edges[e as usize].1;
                if !seen[h as usize] {
                    seen[h as usize] = true;
                    stack.push(h);
                }
            }
        }
        seen
    }

    /// Vertices from which `v` is reachable (including `v`).
    pub fn reach_up(&self, v: u32) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut stack = vec![v];
        seen[v as usize] = true;
        while let Some(x) = stack.pop() {
            for &e in &self.inc[x as usize] {
                let t = self.edges[e as usize].0;
                if !seen[t as usize] {
                    seen[t as usize] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    /// Weakly connected component index per vertex, numbered by smallest vertex.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.vertex_count();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = count;
            let mut stack = vec![s as u32];
            while let Some(x) = stack.pop() {
                let xs = x as usize;
                for &e in self.out[xs].iter().chain(self.inc[xs].iter()) {
                    let (t, h) = self.edges[e as usize];
                    for y in [t, h] {
                        if comp[y as usize] == usize::MAX {
                            comp[y as usize] = count;
                            stack.push(y);
                        }
                    }
                }
            }
            count += 1;
        }
        (count, comp)
    }
}

/// Mutable multigraph with tombstones, used while applying an operation.
#[derive(Clone, Debug)]
pub(crate) struct EditGraph {
    pub labels: Vec<Option<Label>>,
    pub alive: Vec<bool>,
    pub edges: Vec<Option<(u32, u32)>>,
    pub out: Vec<Vec<u32>>,
    pub inc: Vec<Vec<u32>>,
}

impl EditGraph {
    pub fn from_graph(g: &Multigraph) -> Self {
        EditGraph {
            labels: g.labels.clone(),
            alive: vec![true; g.vertex_count()],
            edges: g.edges.iter().map(|&e| Some(e)).collect(),
            out: g.out.clone(),
            inc: g.inc.clone(),
        }
    }

    pub fn add_vertex(&mut self, label: Option<Label>) -> u32 {
        self.labels.push(label);
        self.alive.push(true);
        self.out.push(Vec::with_capacity(2));
        self.inc.push(Vec::with_capacity(2));
        (self.labels.len() - 1) as u32
    }

    pub fn add_edge(&mut self, t: u32, h: u32) -> u32 {
        let id = self.edges.len() as u32;
        self.edges.push(Some((t, h)));
        self.out[t as usize].push(id);
        self.inc[h as usize].push(id);
        id
    }

    pub fn remove_edge(&mut self, e: u32) -> (u32, u32) {
        let (t, h) = self.edges[e as usize].take().expect("edge already removed");
        self.out[t as usize].retain(|&x| x != e);
        self.inc[h as usize].retain(|&x| x != e);
        (t, h)
    }

    /// Replace edge `(t, h)` by `(t, m)` and `(m, h)` for a fresh vertex `m`.
    /// Returns `(m, upper edge, lower edge)`.
    pub fn subdivide(&mut self, e: u32) -> (u32, u32, u32) {
        let (t, h) = self.remove_edge(e);
        let m = self.add_vertex(None);
        let a = self.add_edge(t, m);
        let b = self.add_edge(m, h);
        (m, a, b)
    }

    /// Suppress an in-degree one, out-degree one vertex.
    /// Returns `(removed in-edge, removed out-edge, new edge)`.
    pub fn suppress(&mut self, v: u32) -> (u32, u32, u32) {
        debug_assert_eq!(self.inc[v as usize].len(), 1);
        debug_assert_eq!(self.out[v as usize].len(), 1);
        let ein = self.inc[v as usize][0];
        let eout = self.out[v as usize][0];
        let (p, _) = self.remove_edge(ein);
        let (_, c) = self.remove_edge(eout);
        self.alive[v as usize] = false;
        let ne = self.add_edge(p, c);
        (ein, eout, ne)
    }

    /// Dense renumbering preserving relative order. Returns the graph and
    /// the old-to-new vertex and edge maps.
    pub fn compact(&self) -> (Multigraph, Vec<Option<u32>>, Vec<Option<u32>>) {
        let mut vmap = vec![None; self.labels.len()];
        let mut labels = Vec::with_capacity(self.labels.len());
        for (v, &alive) in self.alive.iter().enumerate() {
            if alive {
                vmap[v] = Some(labels.len() as u32);
                labels.push(self.labels[v]);
            }
        }
        let mut emap = vec![None; self.edges.len()];
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            if let Some((t, h)) = *e {
                emap[i] = Some(edges.len() as u32);
                edges.push((
                    vmap[t as usize].expect("edge on dead vertex"),
                    vmap[h as usize].expect("edge on dead vertex"),
                ));
            }
        }
        (Multigraph::new(labels, edges), vmap, emap)
    }
}
