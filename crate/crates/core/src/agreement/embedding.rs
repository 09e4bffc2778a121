//! Agreement embeddings: witnesses, verification, search and embedding
//! changes.

use std::collections::HashMap;

use serde::Serialize;

use crate::canonical::{Canonical, CanonicalKey};
use crate::error::AgreementError;
use crate::graph::{EdgeId, Label, VertexId};
use crate::network::{PhyloNetwork, ValidationReport};
use crate::pruned::{PrunedGraph, VertexClass};

/// Guest edges mapped to edge-disjoint host paths covering the host, and
/// guest vertices mapped to host vertices.
#[derive(Clone, Debug, Serialize)]
pub struct AgreementEmbedding {
    #[serde(skip)]
    pub host: PhyloNetwork,
    #[serde(skip)]
    pub guest: PrunedGraph,
    pub vertex_map: Vec<VertexId>,
    pub edge_map: Vec<Vec<EdgeId>>,
}

/// Where a sprout sits in the host.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attachment {
    /// Interior vertex of the path of `edge`: the head of its `index`-th
    /// host edge.
    Edge { edge: EdgeId, index: usize },
    /// Shares its host vertex with another guest vertex.
    Vertex(VertexId),
    /// Neither; does not occur in a valid embedding.
    Free,
}

fn may_share(g: &PrunedGraph, v: VertexId) -> bool {
    g.is_isolated_labelled(v) || g.class(v).is_remnant()
}

impl AgreementEmbedding {
    pub fn verify(&self) -> ValidationReport {
        verify_agreement_embedding(self)
    }

    /// The identity embedding of a network into itself.
    pub fn identity(n: &PhyloNetwork) -> Self {
        AgreementEmbedding {
            host: n.clone(),
            guest: PrunedGraph::from_network(n),
            vertex_map: n.vertices().collect(),
            edge_map: n.edges().map(|e| vec![e]).collect(),
        }
    }

    pub fn attachment(&self, v: VertexId) -> Attachment {
        let y = self.vertex_map[v.index()];
        for (i, path) in self.edge_map.iter().enumerate() {
            for (k, &e) in path[..path.len().saturating_sub(1)].iter().enumerate() {
                if self.host.endpoints(e).1 == y {
                    return Attachment::Edge {
                        edge: EdgeId(i as u32),
                        index: k,
                    };
                }
            }
        }
        for (w, &x) in self.vertex_map.iter().enumerate() {
            if w != v.index() && x == y {
                return Attachment::Vertex(VertexId(w as u32));
            }
        }
        Attachment::Free
    }

    /// The guest edge incident to a sprout.
    pub fn sprout_edge(&self, v: VertexId) -> Option<EdgeId> {
        match self.guest.class(v) {
            VertexClass::TailSprout => self.guest.out_edges(v).next(),
            VertexClass::HeadSprout => self.guest.in_edges(v).next(),
            _ => None,
        }
    }
}

/// Checks every condition on an agreement embedding.
///
/// Rules: `endpoints` (map sizes and path ends), `path` (ids exist, paths are
/// non-empty and contiguous), `cover` (host edges used exactly once),
/// `collision` (shared host vertices), `labels`.
pub fn verify_agreement_embedding(e: &AgreementEmbedding) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let (g, n) = (&e.guest, &e.host);
    if e.vertex_map.len() != g.vertex_count() || e.edge_map.len() != g.edge_count() {
        rep.push(
            "endpoints",
            format!(
                "maps cover {} vertices and {} edges, guest has {} and {}",
                e.vertex_map.len(),
                e.edge_map.len(),
                g.vertex_count(),
                g.edge_count()
            ),
        );
        return rep;
    }
    if let Some((v, h)) = e
        .vertex_map
        .iter()
        .enumerate()
        .find(|(_, h)| h.index() >= n.vertex_count())
    {
        rep.push("endpoints", format!("guest v{v} maps to missing host {h}"));
        return rep;
    }
    let mut used = vec![0usize; n.edge_count()];
    for (i, path) in e.edge_map.iter().enumerate() {
        let ge = EdgeId(i as u32);
        if path.is_empty() {
            rep.push("path", format!("guest {ge} maps to an empty path"));
            continue;
        }
        if let Some(bad) = path.iter().find(|x| x.index() >= n.edge_count()) {
            rep.push("path", format!("guest {ge} uses missing host {bad}"));
            continue;
        }
        for w in path.windows(2) {
            if n.endpoints(w[0]).1 != n.endpoints(w[1]).0 {
                rep.push(
                    "path",
                    format!("guest {ge}: {} and {} do not meet", w[0], w[1]),
                );
            }
        }
        for x in path {
            used[x.index()] += 1;
        }
        let (a, b) = g.endpoints(ge);
        let first = n.endpoints(path[0]).0;
        let last = n.endpoints(*path.last().unwrap()).1;
        if first != e.vertex_map[a.index()] || last != e.vertex_map[b.index()] {
            rep.push(
                "endpoints",
                format!("guest {ge} = ({a}, {b}) maps to a path from {first} to {last}"),
            );
        }
    }
    for (x, &c) in used.iter().enumerate() {
        if c != 1 {
            rep.push("cover", format!("host e{x} is used by {c} paths"));
        }
    }
    let mut at: HashMap<VertexId, Vec<VertexId>> = HashMap::new();
    for (v, &h) in e.vertex_map.iter().enumerate() {
        at.entry(h).or_default().push(VertexId(v as u32));
    }
    let mut shared: Vec<_> = at.into_iter().filter(|(_, vs)| vs.len() > 1).collect();
    shared.sort();
    for (h, vs) in shared {
        let ok = vs.len() == 2
            && ((g.is_sprout(vs[0]) && may_share(g, vs[1]))
                || (g.is_sprout(vs[1]) && may_share(g, vs[0])));
        if !ok {
            rep.push(
                "collision",
                format!(
                    "at most two guest vertices may share {h} and one must be a sprout; found {vs:?}"
                ),
            );
        }
    }
    let mut count: HashMap<Label, usize> = HashMap::new();
    for v in g.vertices() {
        if let Some(l) = g.label(v) {
            *count.entry(l).or_default() += 1;
            let h = e.vertex_map[v.index()];
            if n.label(h) != Some(l) {
                rep.push(
                    "labels",
                    format!("guest {v} maps to {h} with a different label"),
                );
            }
        }
    }
    for h in n.vertices() {
        if let Some(l) = n.label(h) {
            let c = count.get(&l).copied().unwrap_or(0);
            if c != 1 {
                rep.push(
                    "labels",
                    format!("label of host {h} appears {c} times in the guest"),
                );
            }
        }
    }
    rep
}

/// Re-splices the paths of the edges of two sprouts of equal orientation,
/// where `u` is attached to the edge of `v`. Applying it again with the
/// roles swapped undoes it.
pub fn embedding_change(
    e: &AgreementEmbedding,
    u: VertexId,
    v: VertexId,
) -> Result<AgreementEmbedding, AgreementError> {
    let err = |m: String| Err(AgreementError::EmbeddingChange(m));
    let g = &e.guest;
    if u.index() >= g.vertex_count() || v.index() >= g.vertex_count() {
        return err("vertex out of range".into());
    }
    let (cu, cv) = (g.class(u), g.class(v));
    if !cu.is_sprout() || cu != cv || u == v {
        return err(format!(
            "{u} and {v} must be distinct sprouts of equal orientation"
        ));
    }
    let eu = e.sprout_edge(u).unwrap();
    let fv = e.sprout_edge(v).unwrap();
    let i = match e.attachment(u) {
        Attachment::Edge { edge, index } if edge == fv => index,
        _ => return err(format!("{u} is not attached to the edge {fv} of {v}")),
    };
    let mut out = e.clone();
    let p = &e.edge_map[eu.index()];
    let q = &e.edge_map[fv.index()];
    let y = e.vertex_map[u.index()];
    if cu == VertexClass::TailSprout {
        let mut np = q[..=i].to_vec();
        np.extend_from_slice(p);
        out.edge_map[eu.index()] = np;
        out.edge_map[fv.index()] = q[i + 1..].to_vec();
    } else {
        let mut np = p.clone();
        np.extend_from_slice(&q[i + 1..]);
        out.edge_map[eu.index()] = np;
        out.edge_map[fv.index()] = q[..=i].to_vec();
    }
    out.vertex_map[u.index()] = e.vertex_map[v.index()];
    out.vertex_map[v.index()] = y;
    Ok(out)
}

struct Search<'a> {
    g: &'a PrunedGraph,
    n: &'a PhyloNetwork,
    hin: Vec<usize>,
    hout: Vec<usize>,
    reach: Vec<Vec<bool>>,
    order: Vec<EdgeId>,
    /// At the last edge of an unanchored component isomorphic to an earlier
    /// one: the guest edges of both, whose smallest host edges must increase.
    twin_check: Vec<Option<(usize, usize)>>,
    comp_edges: Vec<Vec<usize>>,
    vmap: Vec<Option<u32>>,
    at: Vec<Vec<u32>>,
    used: Vec<bool>,
    free_edges: usize,
    passes: Vec<u8>,
    load_in: Vec<usize>,
    load_out: Vec<usize>,
    paths: Vec<Vec<u32>>,
}

impl<'a> Search<'a> {
    fn can_place(&self, v: u32, h: u32) -> bool {
        let gv = VertexId(v);
        let hv = h as usize;
        if let Some(l) = self.g.label(gv) {
            if self.n.label(VertexId(h)) != Some(l) {
                return false;
            }
        }
        match self.at[hv].len() {
            0 => {}
            1 => {
                let o = VertexId(self.at[hv][0]);
                let ok = (self.g.is_sprout(gv) && may_share(self.g, o))
                    || (self.g.is_sprout(o) && may_share(self.g, gv));
                if !ok {
                    return false;
                }
            }
            _ => return false,
        }
        self.load_in[hv] + self.g.indegree(gv) <= self.hin[hv]
            && self.load_out[hv] + self.g.outdegree(gv) <= self.hout[hv]
    }

    fn place(&mut self, v: u32, h: u32) {
        let gv = VertexId(v);
        self.vmap[v as usize] = Some(h);
        self.at[h as usize].push(v);
        self.load_in[h as usize] += self.g.indegree(gv);
        self.load_out[h as usize] += self.g.outdegree(gv);
    }

    fn unplace(&mut self, v: u32, h: u32) {
        let gv = VertexId(v);
        self.vmap[v as usize] = None;
        self.at[h as usize].pop();
        self.load_in[h as usize] -= self.g.indegree(gv);
        self.load_out[h as usize] -= self.g.outdegree(gv);
    }

    fn can_pass(&self, h: u32) -> bool {
        let hv = h as usize;
        self.passes[hv] == 0 && self.load_in[hv] < self.hin[hv] && self.load_out[hv] < self.hout[hv]
    }

    fn set_pass(&mut self, h: u32, on: bool) {
        let hv = h as usize;
        if on {
            self.passes[hv] += 1;
            self.load_in[hv] += 1;
            self.load_out[hv] += 1;
        } else {
            self.passes[hv] -= 1;
            self.load_in[hv] -= 1;
            self.load_out[hv] -= 1;
        }
    }

    fn take(&mut self, x: u32, on: bool) {
        self.used[x as usize] = on;
        if on {
            self.free_edges -= 1;
        } else {
            self.free_edges += 1;
        }
    }

    fn min_host_edge(&self, comp: usize) -> u32 {
        self.comp_edges[comp]
            .iter()
            .flat_map(|&e| self.paths[e].iter().copied())
            .min()
            .unwrap_or(u32::MAX)
    }

    fn run(&mut self, pos: usize) -> bool {
        if pos == self.order.len() {
            return self.free_edges == 0;
        }
        if self.order.len() - pos > self.free_edges {
            return false;
        }
        let ge = self.order[pos];
        let (a, b) = self.g.endpoints(ge);
        let (a, b) = (a.0, b.0);
        match (self.vmap[a as usize], self.vmap[b as usize]) {
            (Some(x), _) => self.extend(pos, x, true, b, &mut Vec::new()),
            (None, Some(y)) => self.extend(pos, y, false, a, &mut Vec::new()),
            (None, None) => {
                for h in 0..self.n.vertex_count() as u32 {
                    if self.can_place(a, h) {
                        self.place(a, h);
                        if self.extend(pos, h, true, b, &mut Vec::new()) {
                            return true;
                        }
                        self.unplace(a, h);
                    }
                }
                false
            }
        }
    }

    /// Grows the path of `order[pos]` from `cur` towards `goal`, forward
    /// when `down`, backward otherwise.
    fn extend(&mut self, pos: usize, cur: u32, down: bool, goal: u32, path: &mut Vec<u32>) -> bool {
        let hg = self.n.graph();
        let edges: Vec<u32> = if down {
            hg.out[cur as usize].clone()
        } else {
            hg.inc[cur as usize].clone()
        };
        let goal_at = self.vmap[goal as usize];
        for x in edges {
            if self.used[x as usize] {
                continue;
            }
            let (t, h) = hg.edges[x as usize];
            let next = if down { h } else { t };
            if let Some(gh) = goal_at {
                let reachable = if down {
                    self.reach[next as usize][gh as usize]
                } else {
                    self.reach[gh as usize][next as usize]
                };
                if !reachable {
                    continue;
                }
            }
            self.take(x, true);
            path.push(x);
            let mut done = false;
            match goal_at {
                Some(gh) if gh == next => done = self.finish(pos, path, down),
                Some(_) => {}
                None => {
                    if self.can_place(goal, next) {
                        self.place(goal, next);
                        done = self.finish(pos, path, down);
                        if !done {
                            self.unplace(goal, next);
                        }
                    }
                }
            }
            if !done && goal_at != Some(next) && self.can_pass(next) {
                self.set_pass(next, true);
                done = self.extend(pos, next, down, goal, path);
                if !done {
                    self.set_pass(next, false);
                }
            }
            if done {
                return true;
            }
            path.pop();
            self.take(x, false);
        }
        false
    }

    fn finish(&mut self, pos: usize, path: &[u32], down: bool) -> bool {
        let mut p = path.to_vec();
        if !down {
            p.reverse();
        }
        let ge = self.order[pos].index();
        self.paths[ge] = p;
        if let Some((prev, cur)) = self.twin_check[pos] {
            if self.min_host_edge(prev) >= self.min_host_edge(cur) {
                self.paths[ge].clear();
                return false;
            }
        }
        if self.run(pos + 1) {
            return true;
        }
        self.paths[ge].clear();
        false
    }
}

/// Searches for an agreement embedding of `guest` into `host` by
/// backtracking over path assignments. Components with labelled vertices are
/// placed first, larger components before smaller ones.
pub fn find_agreement_embedding(
    guest: &PrunedGraph,
    host: &PhyloNetwork,
) -> Option<AgreementEmbedding> {
    let hg = host.graph();
    let nh = host.vertex_count();
    if guest.edge_count() > host.edge_count() || guest.taxa().labels() != host.taxa().labels() {
        return None;
    }
    let mut label_home: HashMap<Label, u32> = HashMap::new();
    for h in host.vertices() {
        if let Some(l) = host.label(h) {
            label_home.insert(l, h.0);
        }
    }
    let mut seen_labels = 0;
    for v in guest.vertices() {
        if let Some(l) = guest.label(v) {
            if !label_home.contains_key(&l) {
                return None;
            }
            seen_labels += 1;
        }
    }
    if seen_labels != label_home.len() {
        return None;
    }
    let (ncomp, comp) = guest.components();
    let mut comp_vertices: Vec<Vec<u32>> = vec![Vec::new(); ncomp];
    for v in 0..guest.vertex_count() {
        comp_vertices[comp[v]].push(v as u32);
    }
    let labelled: Vec<bool> = comp_vertices
        .iter()
        .map(|vs| vs.iter().any(|&v| guest.label(VertexId(v)).is_some()))
        .collect();
    let mut comp_order: Vec<usize> = (0..ncomp).collect();
    comp_order.sort_by_key(|&c| (!labelled[c], std::cmp::Reverse(comp_vertices[c].len()), c));
    let comp_key: Vec<Option<CanonicalKey>> = (0..ncomp)
        .map(|c| {
            if labelled[c] {
                return None;
            }
            let keep_v: Vec<bool> = comp.iter().map(|&x| x == c).collect();
            let keep_e: Vec<bool> = guest
                .edges()
                .map(|e| comp[guest.endpoints(e).0.index()] == c)
                .collect();
            Some(guest.restrict(&keep_v, &keep_e).0.canonical_key())
        })
        .collect();
    let mut order = Vec::new();
    let mut twin_check = Vec::new();
    let mut comp_edges: Vec<Vec<usize>> = vec![Vec::new(); ncomp];
    let mut listed = vec![false; guest.edge_count()];
    let mut last_of_key: HashMap<CanonicalKey, usize> = HashMap::new();
    for &c in &comp_order {
        let start = comp_vertices[c]
            .iter()
            .copied()
            .find(|&v| guest.label(VertexId(v)).is_some())
            .unwrap_or(comp_vertices[c][0]);
        let mut queue = std::collections::VecDeque::from([start]);
        let mut visited = vec![false; guest.vertex_count()];
        visited[start as usize] = true;
        while let Some(x) = queue.pop_front() {
            let xv = VertexId(x);
            for e in guest.out_edges(xv).chain(guest.in_edges(xv)) {
                if listed[e.index()] {
                    continue;
                }
                listed[e.index()] = true;
                order.push(e);
                twin_check.push(None);
                comp_edges[c].push(e.index());
                let (a, b) = guest.endpoints(e);
                for y in [a.0, b.0] {
                    if !visited[y as usize] {
                        visited[y as usize] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        if let Some(k) = &comp_key[c] {
            if let Some(&prev) = last_of_key.get(k) {
                if let Some(last) = twin_check.last_mut() {
                    *last = Some((prev, c));
                }
            }
            last_of_key.insert(k.clone(), c);
        }
    }
    let mut s = Search {
        g: guest,
        n: host,
        hin: (0..nh as u32).map(|v| hg.indeg(v)).collect(),
        hout: (0..nh as u32).map(|v| hg.outdeg(v)).collect(),
        reach: (0..nh as u32).map(|v| hg.reach_down(v)).collect(),
        order,
        twin_check,
        comp_edges,
        vmap: vec![None; guest.vertex_count()],
        at: vec![Vec::new(); nh],
        used: vec![false; host.edge_count()],
        free_edges: host.edge_count(),
        passes: vec![0; nh],
        load_in: vec![0; nh],
        load_out: vec![0; nh],
        paths: vec![Vec::new(); guest.edge_count()],
    };
    let mut labelled_vertices: Vec<u32> = guest
        .vertices()
        .filter(|&v| guest.label(v).is_some())
        .map(|v| v.0)
        .collect();
    labelled_vertices.sort_unstable();
    for v in labelled_vertices {
        let h = label_home[&guest.label(VertexId(v)).unwrap()];
        if !s.can_place(v, h) {
            return None;
        }
        s.place(v, h);
    }
    if !s.run(0) {
        return None;
    }
    Some(AgreementEmbedding {
        host: host.clone(),
        guest: guest.clone(),
        vertex_map: s
            .vmap
            .iter()
            .map(|h| VertexId(h.expect("all placed")))
            .collect(),
        edge_map: s
            .paths
            .iter()
            .map(|p| p.iter().map(|&x| EdgeId(x)).collect())
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agreement::pruning::{apply_pruning, enumerate_prunings, realise_cuts};
    use crate::newick::parse_enewick;

    #[test]
    fn identity_verifies() {
        let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
        assert!(AgreementEmbedding::identity(&n).verify().ok);
        let found = find_agreement_embedding(&PrunedGraph::from_network(&n), &n).unwrap();
        assert!(found.verify().ok);
    }

    #[test]
    fn distinct_trees_do_not_embed() {
        let a = parse_enewick("((1,2),3);").unwrap();
        let b = parse_enewick("((1,3),2);").unwrap();
        assert!(find_agreement_embedding(&PrunedGraph::from_network(&a), &b).is_none());
    }

    #[test]
    fn single_prunings_embed() {
        let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
        let g = PrunedGraph::from_network(&n);
        for p in enumerate_prunings(&g) {
            let h = apply_pruning(&g, p).unwrap();
            let e = find_agreement_embedding(&h, &n).expect("pruned graph embeds");
            assert!(e.verify().ok, "{}", e.verify());
        }
    }

    #[test]
    fn broken_witnesses_are_reported() {
        let n = parse_enewick("((1,2),3);").unwrap();
        let mut e = AgreementEmbedding::identity(&n);
        e.edge_map[0].clear();
        assert!(e.verify().has_rule("path"));
        let mut e = AgreementEmbedding::identity(&n);
        let (a, b) = (e.vertex_map[1], e.vertex_map[2]);
        e.vertex_map[2] = a;
        let _ = b;
        assert!(e.verify().has_rule("collision"));
    }

    #[test]
    fn change_twice_restores() {
        // Cut the root edge at rho and the pendant edge of 3 at its tail: the
        // second sprout sits inside the path of the first sprout's edge.
        let n = parse_enewick("((1,2),3);").unwrap();
        let hg = n.graph();
        let root = n.root().0;
        let top = hg.out[root as usize][0];
        let a = hg.edges[top as usize].1;
        let pend = hg.inc[n.leaf(2).unwrap().index()][0];
        assert_eq!(hg.edges[pend as usize].0, a);
        let e = realise_cuts(&n, &[(root, top), (a, pend)]);
        assert!(e.verify().ok);
        let sprout_at = |h: u32| {
            e.guest
                .vertices()
                .find(|&x| e.guest.is_sprout(x) && e.vertex_map[x.index()].0 == h)
                .unwrap()
        };
        let (u, v) = (sprout_at(a), sprout_at(root));
        let once = embedding_change(&e, u, v).unwrap();
        assert!(once.verify().ok, "{}", once.verify());
        assert_eq!(once.vertex_map[u.index()].0, root);
        assert_eq!(once.vertex_map[v.index()].0, a);
        let twice = embedding_change(&once, v, u).unwrap();
        assert_eq!(twice.edge_map, e.edge_map);
        assert_eq!(twice.vertex_map, e.vertex_map);
        assert!(embedding_change(&e, v, u).is_err());
    }
}
