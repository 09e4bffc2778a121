//! Canonical forms up to label-preserving isomorphism.
//!
//! Each weakly connected component is canonicalised separately by colour
//! refinement seeded with labels and degree profiles; remaining symmetric
//! cells are split by individualisation with full backtracking, keeping the
//! lexicographically smallest serialisation. The graph key is the sorted
//! sequence of component serialisations.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::graph::{Label, Multigraph};
use crate::network::PhyloNetwork;
use crate::pruned::PrunedGraph;

/// Canonical serialisation; equal keys mean isomorphic graphs.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Box<[u8]>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if !s.len().is_multiple_of(2) || !s.is_ascii() {
            return None;
        }
        let bytes = (0..s.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&s[i..i + 2], 16).ok())
            .collect::<Option<Vec<u8>>>()?;
        Some(CanonicalKey(bytes.into_boxed_slice()))
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CanonicalKey({})", self.to_hex())
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for CanonicalKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

pub trait Canonical {
    fn canonical_key(&self) -> CanonicalKey;
}

impl Canonical for PhyloNetwork {
    fn canonical_key(&self) -> CanonicalKey {
        canonical_form(self.graph()).0
    }
}

impl Canonical for PrunedGraph {
    fn canonical_key(&self) -> CanonicalKey {
        canonical_form(&self.g).0
    }
}

fn label_code(l: Option<Label>) -> u32 {
    match l {
        None => 0,
        Some(Label::Root) => 1,
        Some(Label::Taxon(t)) => 2 + t,
    }
}

/// Component-local adjacency.
struct Local {
    codes: Vec<u32>,
    out: Vec<Vec<u32>>,
    inc: Vec<Vec<u32>>,
    edges: Vec<(u32, u32)>,
}

fn rank_by<K: Ord>(keys: &[K]) -> (Vec<u32>, usize) {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0u32; keys.len()];
    let mut c = 0u32;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            c += 1;
        }
        colors[idx[w]] = c;
    }
    (colors, if keys.is_empty() { 0 } else { c as usize + 1 })
}

impl Local {
    fn refine(&self, mut colors: Vec<u32>) -> (Vec<u32>, usize) {
        let (c, mut classes) = rank_by(&colors);
        colors = c;
        let n = self.codes.len();
        let mut sigs: Vec<Vec<u32>> = vec![Vec::new(); n];
        loop {
            for v in 0..n {
                let s = &mut sigs[v];
                s.clear();
                s.push(colors[v]);
                let start = s.len();
                s.extend(self.out[v].iter().map(|&w| colors[w as usize]));
                s[start..].sort_unstable();
                s.push(u32::MAX);
                let start = s.len();
                s.extend(self.inc[v].iter().map(|&w| colors[w as usize]));
                s[start..].sort_unstable();
            }
            let (next, k) = rank_by(&sigs);
            colors = next;
            if k == classes {
                return (colors, k);
            }
            classes = k;
        }
    }

    fn serialize(&self, colors: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let n = self.codes.len();
        let mut order = vec![0u32; n];
        for (v, &c) in colors.iter().enumerate() {
            order[c as usize] = v as u32;
        }
        let mut edges: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(t, h)| (colors[t as usize], colors[h as usize]))
            .collect();
        edges.sort_unstable();
        let mut ser = Vec::with_capacity(2 + n + 2 * edges.len());
        ser.push(n as u32);
        ser.extend(order.iter().map(|&v| self.codes[v as usize]));
        ser.push(edges.len() as u32);
        for (t, h) in edges {
            ser.push(t);
            ser.push(h);
        }
        (ser, order)
    }

    fn search(&self, colors: Vec<u32>, best: &mut Option<(Vec<u32>, Vec<u32>)>) {
        let (colors, classes) = self.refine(colors);
        let n = self.codes.len();
        if classes == n {
            let cand = self.serialize(&colors);
            if best.as_ref().is_none_or(|b| cand.0 < b.0) {
                *best = Some(cand);
            }
            return;
        }
        let mut count = vec![0usize; classes];
        for &c in &colors {
            count[c as usize] += 1;
        }
        let cell = count.iter().position(|&k| k > 1).unwrap() as u32;
        for v in 0..n {
            if colors[v] != cell {
                continue;
            }
            let mut next: Vec<u32> = colors.iter().map(|&c| 2 * c + 1).collect();
            next[v] = 2 * cell;
            self.search(next, best);
        }
    }
}

/// Canonical key and canonical vertex order (position to vertex).
pub(crate) fn canonical_form(g: &Multigraph) -> (CanonicalKey, Vec<u32>) {
    let (ncomp, comp) = g.components();
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
    for (v, &c) in comp.iter().enumerate() {
        members[c].push(v as u32);
    }
    let mut local_index = vec![0u32; g.vertex_count()];
    let mut forms: Vec<(Vec<u32>, Vec<u32>)> = Vec::with_capacity(ncomp);
    for vs in &members {
        for (i, &v) in vs.iter().enumerate() {
            local_index[v as usize] = i as u32;
        }
        let mut local = Local {
            codes: vs
                .iter()
                .map(|&v| label_code(g.labels[v as usize]))
                .collect(),
            out: vec![Vec::new(); vs.len()],
            inc: vec![Vec::new(); vs.len()],
            edges: Vec::new(),
        };
        for &v in vs {
            for &e in &g.out[v as usize] {
                let (t, h) = g.edges[e as usize];
                let (lt, lh) = (local_index[t as usize], local_index[h as usize]);
                local.out[lt as usize].push(lh);
                local.inc[lh as usize].push(lt);
                local.edges.push((lt, lh));
            }
        }
        let seed: Vec<(u32, usize, usize)> = (0..vs.len())
            .map(|i| (local.codes[i], local.inc[i].len(), local.out[i].len()))
            .collect();
        let (init, _) = rank_by(&seed);
        let mut best = None;
        local.search(init, &mut best);
        let (ser, order) = best.expect("search yields a form");
        forms.push((ser, order.iter().map(|&i| vs[i as usize]).collect()));
    }
    forms.sort_by(|a, b| a.0.cmp(&b.0));
    let mut words = Vec::new();
    let mut order = Vec::with_capacity(g.vertex_count());
    for (ser, ord) in forms {
        words.extend_from_slice(&ser);
        order.extend(ord);
    }
    (encode(&words), order)
}

fn encode(words: &[u32]) -> CanonicalKey {
    let max = words.iter().copied().max().unwrap_or(0);
    let mut bytes;
    if max < 0x100 {
        bytes = Vec::with_capacity(words.len() + 1);
        bytes.push(1);
        bytes.extend(words.iter().map(|&w| w as u8));
    } else if max < 0x1_0000 {
        bytes = Vec::with_capacity(2 * words.len() + 1);
        bytes.push(2);
        for &w in words {
            bytes.extend_from_slice(&(w as u16).to_le_bytes());
        }
    } else {
        bytes = Vec::with_capacity(4 * words.len() + 1);
        bytes.push(4);
        for &w in words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
    }
    CanonicalKey(bytes.into_boxed_slice())
}

fn decode(key: &CanonicalKey) -> Vec<u32> {
    let b = key.as_bytes();
    match b.first() {
        Some(1) => b[1..].iter().map(|&x| x as u32).collect(),
        Some(2) => b[1..]
            .chunks_exact(2)
            .map(|c| u16::from_le_bytes([c[0], c[1]]) as u32)
            .collect(),
        Some(4) => b[1..]
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect(),
        _ => Vec::new(),
    }
}

/// Total vertex count encoded in a key.
pub(crate) fn key_vertex_count(key: &CanonicalKey) -> usize {
    let w = decode(key);
    let mut i = 0;
    let mut total = 0;
    while i < w.len() {
        let n = w[i] as usize;
        total += n;
        let m = w[i + 1 + n] as usize;
        i += 2 + n + 2 * m;
    }
    total
}

/// Label-preserving isomorphism from `a` to `b`, as vertex and edge maps.
pub(crate) fn isomorphism(a: &Multigraph, b: &Multigraph) -> Option<(Vec<u32>, Vec<u32>)> {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return None;
    }
    let (ka, oa) = canonical_form(a);
    let (kb, ob) = canonical_form(b);
    if ka != kb {
        return None;
    }
    let mut vmap = vec![0u32; a.vertex_count()];
    for (p, &v) in oa.iter().enumerate() {
        vmap[v as usize] = ob[p];
    }
    let mut pool: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
    for (i, &e) in b.edges.iter().enumerate().rev() {
        pool.entry(e).or_default().push(i as u32);
    }
    let mut emap = Vec::with_capacity(a.edge_count());
    for &(t, h) in &a.edges {
        let e = pool.get_mut(&(vmap[t as usize], vmap[h as usize]))?.pop()?;
        emap.push(e);
    }
    Some((vmap, emap))
}
