//! PR-sequences of length at most `3 d` from a maximum agreement graph.
//!
//! The working state is the agreement graph `W` (plus shadow edges) with two
//! gluings: where each sprout sits in the current network and where it sits
//! in the target network. A sprout sits either on a `W`-edge, at a position
//! in that edge's ordered list, or on a degree-two or isolated labelled
//! vertex. Realising a gluing yields a network. Each case below edits the
//! current gluing; the operation is recovered by matching the realised
//! network against the neighbours of the previous one. Sprouts whose two
//! gluings agree are merged into `W`.

use std::fmt::Write as _;
use std::sync::Arc;

use log::debug;

use crate::agreement::{
    normalize_embedding, verify_agreement_witness, AgreementCertificate, AgreementDistance,
    AgreementEmbedding, Attachment,
};
use crate::canonical::{isomorphism, Canonical, CanonicalKey};
use crate::error::DistanceError;
use crate::graph::{Label, Multigraph};
use crate::network::PhyloNetwork;
use crate::pruned::PrunedGraph;
use crate::rearrangement::{find_connecting_op, OpSet};
use crate::taxa::TaxaSet;

use super::search::sequence_from_keys;
use super::sequence::{RearrangementSequence, Step};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Att {
    Unplaced,
    Vertex(u32),
    Edge(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Agree,
    /// Disagreement edge `E_j`, not yet added.
    Dis(usize),
    Shadow,
}

#[derive(Clone, Debug)]
struct Gluing {
    at: Vec<Att>,
    lists: Vec<Vec<u32>>,
}

struct Realised {
    net: PhyloNetwork,
    /// Host vertex per `W` vertex.
    hv: Vec<u32>,
    /// Host path per `W` edge.
    paths: Vec<Vec<u32>>,
}

/// One applied case with the operations it used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseRecord {
    pub case: &'static str,
    pub unit: String,
    pub ops: usize,
}

/// A built sequence with the cases that produced it.
#[derive(Clone, Debug)]
pub struct BuildTrace {
    pub sequence: RearrangementSequence,
    pub cases: Vec<CaseRecord>,
    /// Operations charged per sprout or disagreement edge.
    pub credits: Vec<usize>,
}

type Res<T> = Result<T, DistanceError>;

fn inv<T>(m: impl Into<String>) -> Res<T> {
    Err(DistanceError::Invariant(m.into()))
}

struct Work {
    taxa: Arc<TaxaSet>,
    labels: Vec<Option<Label>>,
    alive: Vec<bool>,
    edges: Vec<Option<(u32, u32)>>,
    kind: Vec<Kind>,
    /// Credit unit of each sprout.
    unit: Vec<Option<usize>>,
    unit_names: Vec<String>,
    credits: Vec<usize>,
    cur: Gluing,
    tgt: Gluing,
    moved_aside: Vec<bool>,
    added_from_root: Vec<bool>,
    dis_edges: Vec<u32>,
    /// The network reached so far, with the ids the next operation uses.
    net: PhyloNetwork,
    key: CanonicalKey,
    steps: Vec<Step>,
    cases: Vec<CaseRecord>,
}

impl Work {
    // ---- graph queries ----

    fn edge(&self, e: u32) -> (u32, u32) {
        self.edges[e as usize].expect("live edge")
    }

    fn incident(&self, v: u32) -> Vec<u32> {
        (0..self.edges.len() as u32)
            .filter(|&e| matches!(self.edges[e as usize], Some((a, b)) if a == v || b == v))
            .collect()
    }

    fn is_sprout(&self, v: u32) -> bool {
        self.alive[v as usize] && self.labels[v as usize].is_none() && self.incident(v).len() == 1
    }

    fn is_tail(&self, s: u32) -> bool {
        let e = self.incident(s)[0];
        self.edge(e).0 == s
    }

    fn sprout_edge(&self, s: u32) -> u32 {
        self.incident(s)[0]
    }

    fn is_shadow_sprout(&self, s: u32) -> bool {
        self.kind[self.sprout_edge(s) as usize] == Kind::Shadow
    }

    /// Sprouts that still need to reach their target, by edge id.
    fn open_sprouts(&self) -> Vec<u32> {
        let mut v: Vec<u32> = (0..self.labels.len() as u32)
            .filter(|&v| self.is_sprout(v) && !self.is_shadow_sprout(v))
            .filter(|&v| self.cur.at[v as usize] != Att::Unplaced)
            .collect();
        v.sort_by_key(|&s| (self.sprout_edge(s), s));
        v
    }

    fn shadows(&self) -> Vec<u32> {
        (0..self.edges.len() as u32)
            .filter(|&e| self.edges[e as usize].is_some() && self.kind[e as usize] == Kind::Shadow)
            .collect()
    }

    fn unplaced(&self) -> Vec<usize> {
        let mut v: Vec<usize> = (0..self.dis_edges.len())
            .filter(|&j| self.kind[self.dis_edges[j] as usize] == Kind::Dis(j))
            .collect();
        v.sort_by_key(|&j| self.dis_edges[j]);
        v
    }

    fn occupant(&self, g: &Gluing, x: u32, except: Option<u32>) -> Option<u32> {
        (0..self.labels.len() as u32).find(|&s| {
            Some(s) != except && self.alive[s as usize] && g.at[s as usize] == Att::Vertex(x)
        })
    }

    fn vertex_of_label(&self, l: Label) -> u32 {
        (0..self.labels.len() as u32)
            .find(|&v| self.alive[v as usize] && self.labels[v as usize] == Some(l))
            .expect("labelled vertex")
    }

    /// `W`-edge leaving the root's host vertex.
    fn root_top(&self) -> Res<u32> {
        let rho = self.vertex_of_label(Label::Root);
        if let Some(e) = self.incident(rho).first() {
            return Ok(*e);
        }
        match self.occupant(&self.cur, rho, None) {
            Some(o) => Ok(self.sprout_edge(o)),
            None => inv("root is not covered"),
        }
    }

    /// `W`-edge entering the host vertex of leaf 1.
    fn leaf_one_bottom(&self) -> Res<u32> {
        let leaf = self.vertex_of_label(Label::Taxon(0));
        if let Some(e) = self.incident(leaf).first() {
            return Ok(*e);
        }
        match self.occupant(&self.cur, leaf, None) {
            Some(o) => Ok(self.sprout_edge(o)),
            None => inv("leaf 1 is not covered"),
        }
    }

    fn dump(&self) -> String {
        let mut s = String::new();
        for c in &self.cases {
            let _ = write!(s, "[{} {}] ", c.case, c.unit);
        }
        for v in 0..self.labels.len() {
            if !self.alive[v] {
                continue;
            }
            let _ = write!(
                s,
                "v{v}{:?} cur={:?} tgt={:?}; ",
                self.labels[v], self.cur.at[v], self.tgt.at[v]
            );
        }
        for e in 0..self.edges.len() {
            if let Some((a, b)) = self.edges[e] {
                let _ = write!(
                    s,
                    "e{e}=({a},{b}) {:?} cur={:?} tgt={:?}; ",
                    self.kind[e], self.cur.lists[e], self.tgt.lists[e]
                );
            }
        }
        s
    }

    // ---- gluing edits ----

    fn detach(g: &mut Gluing, s: u32) {
        if let Att::Edge(f) = g.at[s as usize] {
            g.lists[f as usize].retain(|&x| x != s);
        }
        g.at[s as usize] = Att::Unplaced;
    }

    fn insert(g: &mut Gluing, s: u32, f: u32, pos: usize) {
        let l = &mut g.lists[f as usize];
        let pos = pos.min(l.len());
        l.insert(pos, s);
        g.at[s as usize] = Att::Edge(f);
    }

    /// Top for a tail sprout, bottom for a head sprout.
    fn insert_end(&self, g: &mut Gluing, s: u32, f: u32) {
        let pos = if self.is_tail(s) {
            0
        } else {
            g.lists[f as usize].len()
        };
        Self::insert(g, s, f, pos);
    }

    /// Embedding change with respect to `u` (attached to the edge of `v`)
    /// and `v`.
    fn change(&self, g: &mut Gluing, u: u32, v: u32) -> Res<()> {
        let (eu, fv) = (self.sprout_edge(u), self.sprout_edge(v));
        if self.is_tail(u) != self.is_tail(v) {
            return inv(format!(
                "change of v{u} and v{v} with different orientation"
            ));
        }
        let i = match g.at[u as usize] {
            Att::Edge(f) if f == fv => g.lists[fv as usize].iter().position(|&x| x == u).unwrap(),
            _ => return inv(format!("v{u} is not attached to the edge of v{v}")),
        };
        let fl = g.lists[fv as usize].clone();
        let el = g.lists[eu as usize].clone();
        let (ne, nf) = if self.is_tail(u) {
            let mut ne = fl[..i].to_vec();
            ne.push(v);
            ne.extend(el);
            (ne, fl[i + 1..].to_vec())
        } else {
            let mut ne = el;
            ne.push(v);
            ne.extend_from_slice(&fl[i + 1..]);
            (ne, fl[..i].to_vec())
        };
        let old_v = g.at[v as usize];
        if let Att::Edge(h) = old_v {
            for x in g.lists[h as usize].iter_mut() {
                if *x == v {
                    *x = u;
                }
            }
        }
        g.at[u as usize] = old_v;
        for &x in &ne {
            g.at[x as usize] = Att::Edge(eu);
        }
        for &x in &nf {
            g.at[x as usize] = Att::Edge(fv);
        }
        g.lists[eu as usize] = ne;
        g.lists[fv as usize] = nf;
        Ok(())
    }

    /// Puts `s` where the target gluing has it, in `g`: on the end of the
    /// target edge, or on the occupant's edge followed by an embedding
    /// change. Returns the displaced occupant, if any.
    fn place(&self, g: &mut Gluing, s: u32) -> Res<Option<u32>> {
        match self.tgt.at[s as usize] {
            Att::Edge(f) => {
                Self::detach(g, s);
                self.insert_end(g, s, f);
                Ok(None)
            }
            Att::Vertex(x) => {
                let o = match self.occupant(g, x, Some(s)) {
                    Some(o) => o,
                    None => return inv(format!("target vertex v{x} of v{s} has no occupant")),
                };
                let f = self.sprout_edge(o);
                Self::detach(g, s);
                let l = &g.lists[f as usize];
                let pos = if self.is_tail(s) {
                    let lead = l.iter().take_while(|&&y| self.is_shadow_sprout(y)).count();
                    if self.labels[x as usize] == Some(Label::Root) {
                        lead
                    } else {
                        0
                    }
                } else {
                    let trail = l
                        .iter()
                        .rev()
                        .take_while(|&&y| self.is_shadow_sprout(y))
                        .count();
                    if self.labels[x as usize].is_some() {
                        l.len() - trail
                    } else {
                        l.len()
                    }
                };
                Self::insert(g, s, f, pos);
                self.change(g, s, o)?;
                Ok(Some(o))
            }
            Att::Unplaced => inv(format!("v{s} has no target")),
        }
    }

    /// Whether the target of `s` can be placed now: not on a disagreement
    /// edge that has not been added.
    fn target_ready(&self, s: u32) -> bool {
        match self.tgt.at[s as usize] {
            Att::Edge(f) => !matches!(self.kind[f as usize], Kind::Dis(_)),
            Att::Vertex(_) => true,
            Att::Unplaced => false,
        }
    }

    /// Occupant of the target vertex of `s` when it is a shadow sprout.
    fn shadow_at_target(&self, s: u32) -> Option<u32> {
        match self.tgt.at[s as usize] {
            Att::Vertex(x) => self
                .occupant(&self.cur, x, Some(s))
                .filter(|&o| self.is_shadow_sprout(o)),
            _ => None,
        }
    }

    // ---- realisation ----

    fn realise(&self, g: &Gluing) -> Res<Option<Realised>> {
        self.realise_with(g, true)
    }

    /// With `strict` unset only acyclicity is checked, so a vertex vacated
    /// by an unprunable sprout does not count as an error.
    fn realise_with(&self, g: &Gluing, strict: bool) -> Res<Option<Realised>> {
        let nv = self.labels.len();
        let mut hv = vec![u32::MAX; nv];
        let mut hl: Vec<Option<Label>> = Vec::new();
        for v in 0..nv as u32 {
            if self.alive[v as usize] && !self.is_sprout(v) {
                hv[v as usize] = hl.len() as u32;
                hl.push(self.labels[v as usize]);
            }
        }
        for v in 0..nv as u32 {
            if !self.is_sprout(v) {
                continue;
            }
            match g.at[v as usize] {
                Att::Edge(_) => {
                    hv[v as usize] = hl.len() as u32;
                    hl.push(None);
                }
                Att::Vertex(x) => {
                    if hv[x as usize] == u32::MAX || self.is_sprout(x) {
                        return inv(format!(
                            "v{v} sits on v{x}, which is not a vertex of the graph"
                        ));
                    }
                    hv[v as usize] = hv[x as usize];
                }
                Att::Unplaced => {}
            }
        }
        let mut hedges = Vec::new();
        let mut paths = vec![Vec::new(); self.edges.len()];
        for e in 0..self.edges.len() {
            let Some((a, b)) = self.edges[e] else {
                continue;
            };
            let list = &g.lists[e];
            if hv[a as usize] == u32::MAX || hv[b as usize] == u32::MAX {
                if !list.is_empty() {
                    return inv(format!("sprouts sit on e{e}, which is not placed"));
                }
                continue;
            }
            let mut pts = vec![hv[a as usize]];
            for &x in list {
                if g.at[x as usize] != Att::Edge(e as u32) || !self.is_sprout(x) {
                    return inv(format!("list of e{e} holds v{x} inconsistently"));
                }
                pts.push(hv[x as usize]);
            }
            pts.push(hv[b as usize]);
            for w in pts.windows(2) {
                paths[e].push(hedges.len() as u32);
                hedges.push((w[0], w[1]));
            }
        }
        let mg = Multigraph::new(hl, hedges);
        if !mg.is_acyclic() {
            return Ok(None);
        }
        let net = PhyloNetwork::from_graph(self.taxa.clone(), mg);
        let rep = net.validate();
        if strict && !rep.ok {
            return inv(format!("realised graph is not a network: {rep}"));
        }
        Ok(Some(Realised { net, hv, paths }))
    }

    fn acyclic_with(&self, g: &Gluing) -> Res<bool> {
        Ok(self.realise(g)?.is_some())
    }

    /// Adopts `g` as the current gluing, recording one operation if the
    /// network changed.
    fn commit(&mut self, g: Gluing) -> Res<usize> {
        let Some(r) = self.realise(&g)? else {
            return inv(format!(
                "committed gluing has a directed cycle; {}",
                self.dump()
            ));
        };
        self.cur = g;
        let key = r.net.canonical_key();
        if key == self.key {
            return Ok(0);
        }
        let Some((op, next)) = find_connecting_op(&self.net, OpSet::Pr, &key) else {
            return inv(format!(
                "no single operation realises the step; {}",
                self.dump()
            ));
        };
        self.steps.push(Step {
            op,
            key: key.clone(),
        });
        self.net = next;
        self.key = key;
        Ok(1)
    }

    /// Asserts the host is unchanged by a relabelling of the gluing.
    fn relabel(&mut self, g: Gluing) -> Res<()> {
        if self.commit(g)? != 0 {
            return inv("an embedding change altered the network");
        }
        Ok(())
    }

    fn charge(&mut self, case: &'static str, unit: usize, ops: usize) {
        self.credits[unit] += ops;
        self.cases.push(CaseRecord {
            case,
            unit: self.unit_names[unit].clone(),
            ops,
        });
        debug!(
            "case {case} on {}: {ops} operation(s)",
            self.unit_names[unit]
        );
    }

    // ---- merging ----

    fn new_edge(&mut self, a: u32, b: u32, kind: Kind) -> u32 {
        self.edges.push(Some((a, b)));
        self.kind.push(kind);
        self.cur.lists.push(Vec::new());
        self.tgt.lists.push(Vec::new());
        (self.edges.len() - 1) as u32
    }

    fn new_vertex(&mut self) -> u32 {
        self.labels.push(None);
        self.alive.push(true);
        self.unit.push(None);
        self.moved_aside.push(false);
        self.cur.at.push(Att::Unplaced);
        self.tgt.at.push(Att::Unplaced);
        (self.labels.len() - 1) as u32
    }

    fn split_lists(g: &mut Gluing, f: u32, s: u32, e1: u32, e2: u32) {
        let l = std::mem::take(&mut g.lists[f as usize]);
        let p = l.iter().position(|&x| x == s).unwrap();
        let (a, b) = (l[..p].to_vec(), l[p + 1..].to_vec());
        for &x in &a {
            g.at[x as usize] = Att::Edge(e1);
        }
        for &x in &b {
            g.at[x as usize] = Att::Edge(e2);
        }
        g.lists[e1 as usize] = a;
        g.lists[e2 as usize] = b;
        g.at[s as usize] = Att::Unplaced;
    }

    /// Merges every sprout whose current and target gluings agree.
    fn merge_settled(&mut self) {
        loop {
            let Some(s) = self
                .open_sprouts()
                .into_iter()
                .find(|&s| self.cur.at[s as usize] == self.tgt.at[s as usize])
            else {
                return;
            };
            match self.cur.at[s as usize] {
                Att::Edge(f) => {
                    let (a, b) = self.edge(f);
                    let kind = self.kind[f as usize];
                    self.edges[f as usize] = None;
                    let e1 = self.new_edge(a, s, kind);
                    let e2 = self.new_edge(s, b, kind);
                    Self::split_lists(&mut self.cur, f, s, e1, e2);
                    Self::split_lists(&mut self.tgt, f, s, e1, e2);
                }
                Att::Vertex(x) => {
                    let e = self.sprout_edge(s);
                    let (a, b) = self.edge(e);
                    self.edges[e as usize] = Some(if a == s { (x, b) } else { (a, x) });
                    self.alive[s as usize] = false;
                    self.cur.at[s as usize] = Att::Unplaced;
                    self.tgt.at[s as usize] = Att::Unplaced;
                }
                Att::Unplaced => unreachable!(),
            }
        }
    }

    fn remove_shadow(&mut self, g: &mut Gluing, sh: u32) -> Res<()> {
        if !g.lists[sh as usize].is_empty() {
            return inv(format!("shadow e{sh} carries sprouts"));
        }
        let (w, z) = self.edge(sh);
        Self::detach(g, w);
        Self::detach(g, z);
        g.at[w as usize] = Att::Unplaced;
        g.at[z as usize] = Att::Unplaced;
        self.edges[sh as usize] = None;
        self.alive[w as usize] = false;
        self.alive[z as usize] = false;
        Ok(())
    }

    /// Adds a shadow edge whose tail is inserted into `ft` at `pt` and head
    /// into `fh` at `ph` (clamped to the end), in a copy of the current
    /// gluing.
    fn add_shadow(&mut self, ft: u32, pt: usize, fh: u32, ph: usize) -> (u32, u32, u32, Gluing) {
        let w = self.new_vertex();
        let z = self.new_vertex();
        let sh = self.new_edge(w, z, Kind::Shadow);
        let mut g = self.cur.clone();
        Self::insert(&mut g, w, ft, pt);
        Self::insert(&mut g, z, fh, ph);
        (w, z, sh, g)
    }

    /// Turns the shadow `sh` into the disagreement edge `E_j`.
    fn shadow_becomes(&mut self, g: &mut Gluing, sh: u32, j: usize) {
        let (w, z) = self.edge(sh);
        let dj = self.dis_edges[j];
        let (u, v) = self.edge(dj);
        for (old, new) in [(w, u), (z, v)] {
            let a = g.at[old as usize];
            if let Att::Edge(h) = a {
                for x in g.lists[h as usize].iter_mut() {
                    if *x == old {
                        *x = new;
                    }
                }
            }
            g.at[new as usize] = a;
            g.at[old as usize] = Att::Unplaced;
            self.alive[old as usize] = false;
        }
        let list = std::mem::take(&mut g.lists[sh as usize]);
        for &x in &list {
            g.at[x as usize] = Att::Edge(dj);
        }
        g.lists[dj as usize] = list;
        self.edges[sh as usize] = None;
        self.kind[dj as usize] = Kind::Agree;
    }

    // ---- blocking ----

    /// Host vertex above which `s` would be regrafted, and the host vertex
    /// next to `s` along its own edge.
    fn regraft_anchor(&self, r: &Realised, s: u32) -> Option<(u32, u32)> {
        let e = self.sprout_edge(s);
        let path = &r.paths[e as usize];
        let hg = r.net.graph();
        let near = if self.is_tail(s) {
            hg.edges[path[0] as usize].1
        } else {
            hg.edges[*path.last()? as usize].0
        };
        let anchor = match self.tgt.at[s as usize] {
            Att::Edge(f) => {
                let p = &r.paths[f as usize];
                if p.is_empty() {
                    return None;
                }
                if self.is_tail(s) {
                    hg.edges[p[0] as usize].0
                } else {
                    hg.edges[*p.last().unwrap() as usize].1
                }
            }
            Att::Vertex(x) => r.hv[x as usize],
            Att::Unplaced => return None,
        };
        Some((anchor, near))
    }

    /// Sprouts on the host paths that would close a cycle if `s` were
    /// regrafted to its target.
    fn blocking_set(&self, r: &Realised, s: u32) -> Vec<u32> {
        let Some((anchor, near)) = self.regraft_anchor(r, s) else {
            return Vec::new();
        };
        let hg = r.net.graph();
        let (from, to) = if self.is_tail(s) {
            (near, anchor)
        } else {
            (anchor, near)
        };
        let down = hg.reach_down(from);
        let up = hg.reach_up(to);
        self.open_sprouts()
            .into_iter()
            .filter(|&x| x != s)
            .filter(|&x| {
                let h = r.hv[x as usize];
                h != u32::MAX && down[h as usize] && up[h as usize]
            })
            .collect()
    }

    fn is_blocked(&self, s: u32) -> Res<bool> {
        if !self.target_ready(s) {
            return Ok(true);
        }
        let mut g = self.cur.clone();
        self.place(&mut g, s)?;
        Ok(self.realise_with(&g, false)?.is_none())
    }

    fn prunable(&self, s: u32) -> bool {
        matches!(self.cur.at[s as usize], Att::Edge(_))
    }

    // ---- cases ----

    /// (A) and (A'): a prunable, unblocked sprout is moved to its target.
    fn case_a(&mut self, shadow: bool) -> Res<bool> {
        for s in self.open_sprouts() {
            if !self.prunable(s) || !self.target_ready(s) {
                continue;
            }
            let sh = self.shadow_at_target(s);
            if sh.is_some() != shadow {
                continue;
            }
            if let Some(o) = sh {
                if !self.cur.lists[self.sprout_edge(o) as usize].is_empty() {
                    continue;
                }
            }
            let mut g = self.cur.clone();
            self.place(&mut g, s)?;
            if !self.acyclic_with(&g)? {
                continue;
            }
            let unit = self.unit[s as usize].unwrap();
            let mut ops = self.commit(g)?;
            if let Some(o) = sh {
                let edge = self.sprout_edge(o);
                let mut g = self.cur.clone();
                self.remove_shadow(&mut g, edge)?;
                ops += self.commit(g)?;
                self.charge("A'", unit, ops);
            } else {
                self.charge("A", unit, ops);
            }
            return Ok(true);
        }
        Ok(false)
    }

    /// Places both sprouts of `E_j` in a copy of the current gluing.
    fn place_dis(&self, j: usize) -> Res<Gluing> {
        let (u, v) = self.edge(self.dis_edges[j]);
        let mut g = self.cur.clone();
        self.place(&mut g, u)?;
        self.place(&mut g, v)?;
        Ok(g)
    }

    /// (B): an addable disagreement edge whose targets carry no shadow.
    fn case_b(&mut self) -> Res<bool> {
        for j in self.unplaced() {
            let (u, v) = self.edge(self.dis_edges[j]);
            if !self.target_ready(u) || !self.target_ready(v) {
                continue;
            }
            if self.shadow_at_target(u).is_some() || self.shadow_at_target(v).is_some() {
                continue;
            }
            let g = self.place_dis(j)?;
            if !self.acyclic_with(&g)? {
                continue;
            }
            self.kind[self.dis_edges[j] as usize] = Kind::Agree;
            let ops = self.commit(g)?;
            let unit = self.unit[u as usize].unwrap();
            self.charge("B", unit, ops);
            return Ok(true);
        }
        Ok(false)
    }

    /// Moves the other end of a disagreement edge off disagreement edges
    /// that have not been added, in the target gluing.
    fn free_other_end(&mut self, other: u32) -> Res<bool> {
        let mut changed = false;
        for _ in 0..self.edges.len() {
            let Att::Edge(f) = self.tgt.at[other as usize] else {
                break;
            };
            let Kind::Dis(_) = self.kind[f as usize] else {
                break;
            };
            let (a, b) = self.edge(f);
            let partner = if self.is_tail(other) { a } else { b };
            let mut t = self.tgt.clone();
            self.change(&mut t, other, partner)?;
            self.tgt = t;
            changed = true;
        }
        Ok(changed)
    }

    /// Shared by (C), (C') and (C''): adds a shadow edge that makes the
    /// unprunable sprout `u` prunable, then moves `u` to its target.
    fn shadow_and_move(&mut self, case: &'static str, u: u32) -> Res<()> {
        let eu = self.sprout_edge(u);
        let (w, z, _, mut g) = if self.is_tail(u) {
            let fh = self.leaf_one_bottom()?;
            self.add_shadow(eu, 0, fh, usize::MAX)
        } else {
            let ft = self.root_top()?;
            self.add_shadow(ft, 0, eu, usize::MAX)
        };
        let first = if self.is_tail(u) { w } else { z };
        let ops1 = self.commit(g.clone())?;
        self.change(&mut g, first, u)?;
        self.relabel(g)?;
        let mut g = self.cur.clone();
        self.place(&mut g, u)?;
        if !self.acyclic_with(&g)? {
            return inv(format!("case {case}: v{u} became blocked; {}", self.dump()));
        }
        let ops2 = self.commit(g)?;
        let unit = self.unit[u as usize].unwrap();
        self.charge(case, unit, ops1 + ops2);
        Ok(())
    }

    /// (C) for tail sprouts on the root, (C') for head sprouts on leaves.
    fn case_c(&mut self, tail: bool) -> Res<bool> {
        for v in self.open_sprouts() {
            if self.is_tail(v) != tail {
                continue;
            }
            let Att::Vertex(x) = self.cur.at[v as usize] else {
                continue;
            };
            let on_label = match self.labels[x as usize] {
                Some(Label::Root) => tail,
                Some(Label::Taxon(_)) => !tail,
                None => false,
            };
            if !on_label {
                continue;
            }
            let Some(u) = self.occupant(&self.tgt, x, Some(v)) else {
                continue;
            };
            if let Some(j) = self.dis_index(u) {
                if self.kind[self.dis_edges[j] as usize] == Kind::Dis(j) {
                    let (a, b) = self.edge(self.dis_edges[j]);
                    let other = if a == u { b } else { a };
                    if self.free_other_end(other)? {
                        debug!("case {}: freed E_{}", if tail { "C" } else { "C'" }, j + 1);
                        return Ok(true);
                    }
                    continue;
                }
            }
            if self.prunable(u) || self.cur.at[u as usize] == Att::Unplaced {
                continue;
            }
            if self.is_blocked(u)? {
                continue;
            }
            self.shadow_and_move(if tail { "C" } else { "C'" }, u)?;
            return Ok(true);
        }
        Ok(false)
    }

    fn dis_index(&self, s: u32) -> Option<usize> {
        let e = self.sprout_edge(s);
        self.dis_edges.iter().position(|&d| d == e)
    }

    /// (B'): an addable disagreement edge with a shadow at a target vertex.
    fn case_b_shadow(&mut self) -> Res<bool> {
        for j in self.unplaced() {
            let dj = self.dis_edges[j];
            let (u, v) = self.edge(dj);
            if !self.target_ready(u) || !self.target_ready(v) {
                continue;
            }
            let (su, sv) = (self.shadow_at_target(u), self.shadow_at_target(v));
            if su.is_none() && sv.is_none() {
                continue;
            }
            let unit = self.unit[u as usize].unwrap();
            if let Some(z) = sv {
                // Tail-move the shadow entering v's target to u's target.
                let sh = self.sprout_edge(z);
                let (w, _) = self.edge(sh);
                let mut g = self.cur.clone();
                let saved = self.tgt.at[w as usize];
                self.tgt.at[w as usize] = self.tgt.at[u as usize];
                let displaced = self.place(&mut g, w);
                self.tgt.at[w as usize] = saved;
                let displaced = displaced?;
                if !self.acyclic_with(&g)? {
                    continue;
                }
                if let Some(o) = displaced {
                    if self.is_shadow_sprout(o) && !g.lists[self.sprout_edge(o) as usize].is_empty()
                    {
                        continue;
                    }
                }
                let mut ops = self.commit(g)?;
                let mut g = self.cur.clone();
                self.shadow_becomes(&mut g, sh, j);
                self.relabel(g)?;
                if let Some(o) = displaced.filter(|&o| self.is_shadow_sprout(o)) {
                    let mut g = self.cur.clone();
                    let e = self.sprout_edge(o);
                    self.remove_shadow(&mut g, e)?;
                    ops += self.commit(g)?;
                }
                self.charge("B'", unit, ops);
                return Ok(true);
            }
            let w = su.unwrap();
            let sh = self.sprout_edge(w);
            let (_, z) = self.edge(sh);
            if !self.cur.lists[sh as usize].is_empty() {
                continue;
            }
            let mut g = self.cur.clone();
            let saved = self.tgt.at[z as usize];
            self.tgt.at[z as usize] = self.tgt.at[v as usize];
            let displaced = self.place(&mut g, z);
            self.tgt.at[z as usize] = saved;
            displaced?;
            if !self.acyclic_with(&g)? {
                continue;
            }
            let ops = self.commit(g)?;
            let mut g = self.cur.clone();
            self.shadow_becomes(&mut g, sh, j);
            self.relabel(g)?;
            self.charge("B'", unit, ops);
            return Ok(true);
        }
        Ok(false)
    }

    /// (D): a prunable, blocked sprout that blocks another one is moved to
    /// the top of the root edge or the bottom of the edge of leaf 1.
    fn case_d(&mut self) -> Res<bool> {
        let Some(r) = self.realise(&self.cur)? else {
            return inv("current gluing is cyclic");
        };
        let open = self.open_sprouts();
        let mut blocking = vec![false; self.labels.len()];
        for &x in &open {
            if self.is_blocked(x)? {
                for b in self.blocking_set(&r, x) {
                    blocking[b as usize] = true;
                }
            }
        }
        for &s in &open {
            if !blocking[s as usize] || self.moved_aside[s as usize] || !self.prunable(s) {
                continue;
            }
            if !self.is_blocked(s)? {
                continue;
            }
            let f = if self.is_tail(s) {
                self.root_top()?
            } else {
                self.leaf_one_bottom()?
            };
            let mut g = self.cur.clone();
            Self::detach(&mut g, s);
            self.insert_end(&mut g, s, f);
            if !self.acyclic_with(&g)? {
                continue;
            }
            let ops = self.commit(g)?;
            if ops == 0 {
                continue;
            }
            self.moved_aside[s as usize] = true;
            let unit = self.unit[s as usize].unwrap();
            self.charge("D", unit, ops);
            return Ok(true);
        }
        Ok(false)
    }

    /// (D'): a disagreement edge that is not addable and whose head targets
    /// a vertex is added from the top of the root edge to that vertex.
    fn case_d_prime(&mut self) -> Res<bool> {
        for j in self.unplaced() {
            if self.added_from_root[j] {
                continue;
            }
            let (u, v) = self.edge(self.dis_edges[j]);
            let Att::Vertex(_) = self.tgt.at[v as usize] else {
                continue;
            };
            if self.shadow_at_target(v).is_some() {
                continue;
            }
            let f = self.root_top()?;
            let mut g = self.cur.clone();
            Self::insert(&mut g, u, f, 0);
            self.place(&mut g, v)?;
            if !self.acyclic_with(&g)? {
                continue;
            }
            self.kind[self.dis_edges[j] as usize] = Kind::Agree;
            self.added_from_root[j] = true;
            let ops = self.commit(g)?;
            let unit = self.unit[u as usize].unwrap();
            self.charge("D'", unit, ops);
            return Ok(true);
        }
        Ok(false)
    }

    /// (C''): an unprunable, unblocked sprout.
    fn case_c_unprunable(&mut self) -> Res<bool> {
        for u in self.open_sprouts() {
            if self.prunable(u) || !self.target_ready(u) || self.is_blocked(u)? {
                continue;
            }
            let Some(o) = self.shadow_at_target(u) else {
                self.shadow_and_move("C''", u)?;
                return Ok(true);
            };
            // The target vertex holds a shadow sprout `o`: move the far end
            // of that shadow next to `u`, exchange the roles of the two
            // edges, and move the far end back.
            let sh = self.sprout_edge(o);
            let (w, z) = self.edge(sh);
            let far = if self.is_tail(u) { z } else { w };
            let eu = self.sprout_edge(u);
            let Att::Vertex(y) = self.cur.at[u as usize] else {
                unreachable!()
            };
            let mut g = self.cur.clone();
            Self::detach(&mut g, far);
            if self.is_tail(u) {
                Self::insert(&mut g, far, eu, 0);
            } else {
                let n = g.lists[eu as usize].len();
                Self::insert(&mut g, far, eu, n);
            }
            if !self.acyclic_with(&g)? {
                continue;
            }
            let ops1 = self.commit(g)?;
            let mut g = self.cur.clone();
            let ls = std::mem::take(&mut g.lists[sh as usize]);
            let lu = std::mem::take(&mut g.lists[eu as usize]);
            let new_u: Vec<u32> = if self.is_tail(u) {
                let mut v = ls.clone();
                v.extend(lu.iter().copied());
                v
            } else {
                let mut v = lu.clone();
                v.extend(ls.iter().copied());
                v
            };
            for &x in &new_u {
                g.at[x as usize] = Att::Edge(eu);
            }
            g.lists[eu as usize] = new_u;
            g.at[u as usize] = g.at[o as usize];
            g.at[o as usize] = Att::Vertex(y);
            self.relabel(g)?;
            let back = if self.is_tail(u) {
                self.leaf_one_bottom()?
            } else {
                self.root_top()?
            };
            let mut g = self.cur.clone();
            Self::detach(&mut g, far);
            self.insert_end(&mut g, far, back);
            let ops2 = self.commit(g)?;
            let unit = self.unit[u as usize].unwrap();
            self.charge("C''", unit, ops1 + ops2);
            return Ok(true);
        }
        Ok(false)
    }

    fn finished(&self) -> bool {
        self.open_sprouts().is_empty() && self.unplaced().is_empty() && self.shadows().is_empty()
    }

    fn step(&mut self) -> Res<bool> {
        self.merge_settled();
        if self.finished() {
            return Ok(false);
        }
        let progressed = self.case_a(false)?
            || self.case_b()?
            || self.case_c(true)?
            || self.case_c(false)?
            || self.case_a(true)?
            || self.case_b_shadow()?
            || self.case_d()?
            || self.case_d_prime()?
            || self.case_c_unprunable()?;
        if !progressed {
            return inv(format!("no case applies; {}", self.dump()));
        }
        Ok(true)
    }
}

/// Gluing of a guest embedding, translated to `W` ids through `vmap` and
/// `emap` (guest id to `W` id).
fn gluing_from(
    e: &AgreementEmbedding,
    vmap: &[u32],
    emap: &[u32],
    nv: usize,
    ne: usize,
) -> Res<Gluing> {
    let mut at = vec![Att::Unplaced; nv];
    let mut pos: Vec<Vec<(usize, u32)>> = vec![Vec::new(); ne];
    for v in e.guest.vertices() {
        if !e.guest.is_sprout(v) {
            continue;
        }
        let w = vmap[v.index()];
        match e.attachment(v) {
            Attachment::Edge { edge, index } => {
                let f = emap[edge.index()];
                at[w as usize] = Att::Edge(f);
                pos[f as usize].push((index, w));
            }
            Attachment::Vertex(x) => at[w as usize] = Att::Vertex(vmap[x.index()]),
            Attachment::Free => return inv(format!("sprout {v} is attached to nothing")),
        }
    }
    let lists = pos
        .into_iter()
        .map(|mut l| {
            l.sort_unstable();
            l.into_iter().map(|(_, w)| w).collect()
        })
        .collect();
    Ok(Gluing { at, lists })
}

/// The embedding with its guest renumbered to `guest`.
fn reindex(e: &AgreementEmbedding, guest: &PrunedGraph) -> Option<AgreementEmbedding> {
    if e.guest.g == guest.g {
        return Some(e.clone());
    }
    let (vmap, emap) = isomorphism(&guest.g, &e.guest.g)?;
    Some(AgreementEmbedding {
        host: e.host.clone(),
        guest: guest.clone(),
        vertex_map: vmap.iter().map(|&v| e.vertex_map[v as usize]).collect(),
        edge_map: emap
            .iter()
            .map(|&f| e.edge_map[f as usize].clone())
            .collect(),
    })
}

/// Builds a PR-sequence from `n` to `np` of length at most `3 d` from a
/// maximum agreement graph with its embeddings, applying the first
/// applicable case in the order A, B, C, C', A', B', D, D', C''.
pub fn build_pr_sequence(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    mag: &AgreementDistance,
) -> Res<BuildTrace> {
    let cert = AgreementCertificate {
        embedding_n: mag.embedding_n.clone(),
        embedding_nprime: mag.embedding_nprime.clone(),
    };
    let rep = verify_agreement_witness(&mag.graph, n, np, &cert);
    if !rep.ok {
        return Err(DistanceError::Precondition(format!(
            "agreement witness: {rep}"
        )));
    }
    let swapped = n.reticulation_count() > np.reticulation_count();
    let (poor, rich, e_poor, e_rich) = if swapped {
        (np, n, &mag.embedding_nprime, &mag.embedding_n)
    } else {
        (n, np, &mag.embedding_n, &mag.embedding_nprime)
    };
    let g = &mag.graph;
    let (core, cv, ce) = g.without_disagreement();
    let mismatch =
        || DistanceError::Precondition("embedding guest does not match the graph".into());
    let e_poor = reindex(e_poor, &core).ok_or_else(mismatch)?;
    let e_rich = reindex(e_rich, &g.graph).ok_or_else(mismatch)?;
    let e_rich = normalize_embedding(g, rich, &e_rich)?;
    let nv = g.graph.vertex_count();
    let ne = g.graph.edge_count();
    let mut inv_v = vec![0u32; core.vertex_count()];
    for (v, c) in cv.iter().enumerate() {
        if let Some(c) = c {
            inv_v[*c as usize] = v as u32;
        }
    }
    let mut inv_e = vec![0u32; core.edge_count()];
    for (e, c) in ce.iter().enumerate() {
        if let Some(c) = c {
            inv_e[*c as usize] = e as u32;
        }
    }
    let id_v: Vec<u32> = (0..nv as u32).collect();
    let id_e: Vec<u32> = (0..ne as u32).collect();
    let cur = gluing_from(&e_poor, &inv_v, &inv_e, nv, ne)?;
    let tgt = gluing_from(&e_rich, &id_v, &id_e, nv, ne)?;

    let mut kind = vec![Kind::Agree; ne];
    let mut unit = vec![None; nv];
    let mut unit_names = Vec::new();
    let dis_edges: Vec<u32> = g.disagreement.iter().map(|e| e.0).collect();
    for (j, &d) in dis_edges.iter().enumerate() {
        kind[d as usize] = Kind::Dis(j);
    }
    for v in g.graph.vertices() {
        if g.graph.is_sprout(v)
            && !dis_edges.iter().any(|&d| {
                let (a, b) = g.graph.endpoints(crate::graph::EdgeId(d));
                a == v || b == v
            })
        {
            unit[v.index()] = Some(unit_names.len());
            unit_names.push(format!("sprout v{}", v.0));
        }
    }
    for (j, &d) in dis_edges.iter().enumerate() {
        let (a, b) = g.graph.endpoints(crate::graph::EdgeId(d));
        unit[a.index()] = Some(unit_names.len());
        unit[b.index()] = Some(unit_names.len());
        unit_names.push(format!("E_{}", j + 1));
    }
    let units = unit_names.len();
    let mut w = Work {
        taxa: poor.taxa().clone(),
        labels: (0..nv)
            .map(|v| g.graph.label(crate::graph::VertexId(v as u32)))
            .collect(),
        alive: vec![true; nv],
        edges: g
            .graph
            .edges()
            .map(|e| {
                let (a, b) = g.graph.endpoints(e);
                Some((a.0, b.0))
            })
            .collect(),
        kind,
        unit,
        unit_names,
        credits: vec![0; units],
        cur,
        tgt,
        moved_aside: vec![false; nv],
        added_from_root: vec![false; dis_edges.len()],
        dis_edges,
        net: poor.clone(),
        key: poor.canonical_key(),
        steps: Vec::new(),
        cases: Vec::new(),
    };
    match w.realise(&w.cur)? {
        Some(r) if r.net.canonical_key() == w.key => {}
        _ => return inv("the start gluing does not realise the start network"),
    }
    let d = mag.d;
    let mut guard = 0;
    while w.step()? {
        guard += 1;
        if guard > 8 * (d + 2) + 16 {
            return inv(format!("no progress; {}", w.dump()));
        }
    }
    let target = rich.canonical_key();
    if w.key != target {
        return inv(format!("sequence ends elsewhere; {}", w.dump()));
    }
    if let Some(u) = w.credits.iter().position(|&c| c > 3) {
        return inv(format!(
            "{} received {} operations",
            w.unit_names[u], w.credits[u]
        ));
    }
    if w.steps.len() > 3 * d {
        return inv(format!(
            "{} operations exceed 3d = {}",
            w.steps.len(),
            3 * d
        ));
    }
    let forward = RearrangementSequence {
        start: poor.clone(),
        steps: w.steps,
        ops: OpSet::Pr,
        end: target,
    };
    let sequence = if swapped {
        let mut keys: Vec<CanonicalKey> = vec![forward.start.canonical_key()];
        keys.extend(forward.steps.iter().map(|s| s.key.clone()));
        keys.reverse();
        sequence_from_keys(n, &keys, OpSet::Pr)?
    } else {
        forward
    };
    Ok(BuildTrace {
        sequence,
        cases: w.cases,
        credits: w.credits,
    })
}

/// The sequence of [`build_pr_sequence`].
pub fn mag_to_pr_sequence(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    mag: &AgreementDistance,
) -> Res<RearrangementSequence> {
    Ok(build_pr_sequence(n, np, mag)?.sequence)
}
