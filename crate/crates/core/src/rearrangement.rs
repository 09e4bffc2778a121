//! Prune-and-regraft operations and neighbourhoods.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::canonical::{Canonical, CanonicalKey};
use crate::error::OpError;
use crate::graph::{EdgeId, EditGraph, VertexId};
use crate::network::{PhyloNetwork, VertexKind};

/// One rearrangement, addressed by edge ids of the network it applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RearrangementOp {
    /// Prune `moved = (u, v)` at its tail `u` and regraft `u` onto `target`.
    Pr0Tail { moved: EdgeId, target: EdgeId },
    /// Prune `moved = (u, v)` at its head `v` and regraft `v` onto `target`.
    Pr0Head { moved: EdgeId, target: EdgeId },
    /// Subdivide `moved` with a new head `v'`, subdivide `target` with a new
    /// tail `u'` and add `(u', v')`. `target == moved` selects the upper half
    /// of the subdivided edge, which creates a pair of parallel edges.
    PrPlus { moved: EdgeId, target: EdgeId },
    /// Delete `edge = (u, v)` and suppress `u` and `v`.
    PrMinus { edge: EdgeId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpKind {
    Pr0Tail,
    Pr0Head,
    PrPlus,
    PrMinus,
}

impl RearrangementOp {
    pub fn kind(&self) -> OpKind {
        match self {
            RearrangementOp::Pr0Tail { .. } => OpKind::Pr0Tail,
            RearrangementOp::Pr0Head { .. } => OpKind::Pr0Head,
            RearrangementOp::PrPlus { .. } => OpKind::PrPlus,
            RearrangementOp::PrMinus { .. } => OpKind::PrMinus,
        }
    }

    /// Change in the number of reticulations.
    pub fn reticulation_delta(&self) -> i32 {
        match self.kind() {
            OpKind::PrPlus => 1,
            OpKind::PrMinus => -1,
            _ => 0,
        }
    }
}

impl fmt::Display for RearrangementOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RearrangementOp::Pr0Tail { moved, target } => write!(f, "tail PR0 {moved} -> {target}"),
            RearrangementOp::Pr0Head { moved, target } => write!(f, "head PR0 {moved} -> {target}"),
            RearrangementOp::PrPlus { moved, target } => write!(f, "PR+ {moved} <- {target}"),
            RearrangementOp::PrMinus { edge } => write!(f, "PR- {edge}"),
        }
    }
}

/// Which operations a distance or neighbourhood may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpSet {
    Pr,
    Snpr,
    Rspr,
}

impl OpSet {
    pub fn name(self) -> &'static str {
        match self {
            OpSet::Pr => "PR",
            OpSet::Snpr => "SNPR",
            OpSet::Rspr => "rSPR",
        }
    }

    pub fn permits(self, kind: OpKind) -> bool {
        match self {
            OpSet::Pr => true,
            OpSet::Snpr => kind != OpKind::Pr0Head,
            OpSet::Rspr => kind == OpKind::Pr0Tail,
        }
    }
}

fn edge(g: &PhyloNetwork, e: EdgeId) -> Result<(VertexId, VertexId), OpError> {
    if e.index() >= g.edge_count() {
        return Err(OpError::UnknownEdge(e.0));
    }
    Ok(g.endpoints(e))
}

/// Checks an operation against the definitions; `Ok` iff it applies.
pub fn check_op(g: &PhyloNetwork, op: &RearrangementOp) -> Result<(), OpError> {
    match *op {
        RearrangementOp::Pr0Tail { moved, target } => {
            let (u, v) = edge(g, moved)?;
            let (x, _) = edge(g, target)?;
            if g.kind(u) != VertexKind::InnerTree {
                return Err(OpError::TailNotTreeVertex);
            }
            if moved == target {
                return Err(OpError::TargetIsMovedEdge);
            }
            if x == v || g.is_proper_ancestor(v, x) {
                return Err(OpError::TargetIsDescendant);
            }
            Ok(())
        }
        RearrangementOp::Pr0Head { moved, target } => {
            let (u, v) = edge(g, moved)?;
            let (_, y) = edge(g, target)?;
            if g.kind(v) != VertexKind::Reticulation {
                return Err(OpError::HeadNotReticulation);
            }
            if moved == target {
                return Err(OpError::TargetIsMovedEdge);
            }
            if y == u || g.is_proper_ancestor(y, u) {
                return Err(OpError::TargetIsAncestor);
            }
            Ok(())
        }
        RearrangementOp::PrPlus { moved, target } => {
            let (_, v) = edge(g, moved)?;
            let (x, _) = edge(g, target)?;
            if target != moved && (x == v || g.is_proper_ancestor(v, x)) {
                return Err(OpError::TargetIsDescendant);
            }
            Ok(())
        }
        RearrangementOp::PrMinus { edge: e } => {
            let (u, v) = edge(g, e)?;
            if g.kind(u) != VertexKind::InnerTree {
                return Err(OpError::TailNotTreeVertex);
            }
            if g.kind(v) != VertexKind::Reticulation {
                return Err(OpError::HeadNotReticulation);
            }
            Ok(())
        }
    }
}

pub fn is_valid_op(g: &PhyloNetwork, op: &RearrangementOp) -> bool {
    check_op(g, op).is_ok()
}

/// Checks membership in `ops` as well as validity.
pub fn check_op_in(g: &PhyloNetwork, op: &RearrangementOp, ops: OpSet) -> Result<(), OpError> {
    if !ops.permits(op.kind()) {
        return Err(OpError::NotInOpSet(ops.name()));
    }
    if ops == OpSet::Rspr && !g.is_tree() {
        return Err(OpError::NotATree);
    }
    check_op(g, op)
}

/// Maps `target` to the edge that replaced it if it was consumed by the
/// suppression that produced `merged`.
fn remap(target: u32, suppressed: (u32, u32, u32)) -> u32 {
    let (a, b, merged) = suppressed;
    if target == a || target == b {
        merged
    } else {
        target
    }
}

pub fn apply_op(g: &PhyloNetwork, op: &RearrangementOp) -> Result<PhyloNetwork, OpError> {
    check_op(g, op)?;
    Ok(apply_unchecked(g, op))
}

pub fn apply_op_in(
    g: &PhyloNetwork,
    op: &RearrangementOp,
    ops: OpSet,
) -> Result<PhyloNetwork, OpError> {
    check_op_in(g, op, ops)?;
    Ok(apply_unchecked(g, op))
}

pub(crate) fn apply_unchecked(g: &PhyloNetwork, op: &RearrangementOp) -> PhyloNetwork {
    let mut w = EditGraph::from_graph(g.graph());
    match *op {
        RearrangementOp::Pr0Tail { moved, target } => {
            let (u, v) = w.remove_edge(moved.0);
            let s = w.suppress(u);
            let (u2, _, _) = w.subdivide(remap(target.0, s));
            w.add_edge(u2, v);
        }
        RearrangementOp::Pr0Head { moved, target } => {
            let (u, v) = w.remove_edge(moved.0);
            let s = w.suppress(v);
            let (v2, _, _) = w.subdivide(remap(target.0, s));
            w.add_edge(u, v2);
        }
        RearrangementOp::PrPlus { moved, target } => {
            let (v2, upper, _) = w.subdivide(moved.0);
            let t = if target == moved { upper } else { target.0 };
            let (u2, _, _) = w.subdivide(t);
            w.add_edge(u2, v2);
        }
        RearrangementOp::PrMinus { edge } => {
            let (u, v) = w.remove_edge(edge.0);
            w.suppress(u);
            w.suppress(v);
        }
    }
    let (mg, _, _) = w.compact();
    PhyloNetwork::from_graph(g.taxa().clone(), mg)
}

/// `true` if the regraft target only touches the suppressed vertex, so the
/// operation returns the network unchanged.
fn is_trivial(g: &PhyloNetwork, op: &RearrangementOp) -> bool {
    match *op {
        RearrangementOp::Pr0Tail { moved, target } => {
            let (u, _) = g.endpoints(moved);
            let (x, y) = g.endpoints(target);
            x == u || y == u
        }
        RearrangementOp::Pr0Head { moved, target } => {
            let (_, v) = g.endpoints(moved);
            let (x, y) = g.endpoints(target);
            x == v || y == v
        }
        _ => false,
    }
}

/// Every valid operation of the op set, in a fixed order: tail moves, head
/// moves, additions, removals; edges by id. Operations whose target only
/// touches the suppressed vertex are omitted since they are the identity.
pub fn enumerate_ops(g: &PhyloNetwork, ops: OpSet) -> Vec<RearrangementOp> {
    let mut out = Vec::new();
    enumerate_ops_capped(g, ops, true, &mut out);
    out
}

/// As [`enumerate_ops`]; additions are skipped when `with_plus` is false.
pub(crate) fn enumerate_ops_capped(
    g: &PhyloNetwork,
    ops: OpSet,
    with_plus: bool,
    out: &mut Vec<RearrangementOp>,
) {
    if ops == OpSet::Rspr && !g.is_tree() {
        return;
    }
    let mg = g.graph();
    let m = g.edge_count() as u32;
    for e in 0..m {
        let (u, v) = mg.edges[e as usize];
        if g.kind(VertexId(u)) != VertexKind::InnerTree {
            continue;
        }
        let below = mg.reach_down(v);
        for t in 0..m {
            let x = mg.edges[t as usize].0;
            if t == e || below[x as usize] {
                continue;
            }
            let op = RearrangementOp::Pr0Tail {
                moved: EdgeId(e),
                target: EdgeId(t),
            };
            if !is_trivial(g, &op) {
                out.push(op);
            }
        }
    }
    if ops.permits(OpKind::Pr0Head) {
        for e in 0..m {
            let (u, v) = mg.edges[e as usize];
            if g.kind(VertexId(v)) != VertexKind::Reticulation {
                continue;
            }
            let above = mg.reach_up(u);
            for t in 0..m {
                let y = mg.edges[t as usize].1;
                if t == e || above[y as usize] {
                    continue;
                }
                let op = RearrangementOp::Pr0Head {
                    moved: EdgeId(e),
                    target: EdgeId(t),
                };
                if !is_trivial(g, &op) {
                    out.push(op);
                }
            }
        }
    }
    if ops.permits(OpKind::PrPlus) && with_plus {
        for e in 0..m {
            let v = mg.edges[e as usize].1;
            let below = mg.reach_down(v);
            for t in 0..m {
                let x = mg.edges[t as usize].0;
                if t != e && below[x as usize] {
                    continue;
                }
                out.push(RearrangementOp::PrPlus {
                    moved: EdgeId(e),
                    target: EdgeId(t),
                });
            }
        }
    }
    if ops.permits(OpKind::PrMinus) {
        for e in 0..m {
            let (u, v) = mg.edges[e as usize];
            if g.kind(VertexId(u)) == VertexKind::InnerTree
                && g.kind(VertexId(v)) == VertexKind::Reticulation
            {
                out.push(RearrangementOp::PrMinus { edge: EdgeId(e) });
            }
        }
    }
}

/// One neighbour with the first operation that reaches it.
#[derive(Clone, Debug)]
pub struct Neighbor {
    pub op: RearrangementOp,
    pub key: CanonicalKey,
    pub network: PhyloNetwork,
}

/// All networks one operation away, deduplicated by canonical key, without
/// `g` itself. Ordered by the first operation reaching each.
pub fn enumerate_neighbors(g: &PhyloNetwork, ops: OpSet) -> Vec<Neighbor> {
    let own = g.canonical_key();
    let mut seen: HashSet<CanonicalKey> = HashSet::new();
    seen.insert(own);
    let mut out = Vec::new();
    for op in enumerate_ops(g, ops) {
        let network = apply_unchecked(g, &op);
        let key = network.canonical_key();
        if seen.insert(key.clone()) {
            out.push(Neighbor { op, key, network });
        }
    }
    out
}

/// First valid operation of the op set whose result has key `target`.
pub fn find_connecting_op(
    g: &PhyloNetwork,
    ops: OpSet,
    target: &CanonicalKey,
) -> Option<(RearrangementOp, PhyloNetwork)> {
    // Each reticulation contributes two vertices.
    let n = g.vertex_count() as i64;
    let want = crate::canonical::key_vertex_count(target) as i64;
    enumerate_ops(g, ops).into_iter().find_map(|op| {
        if n + 2 * op.reticulation_delta() as i64 != want {
            return None;
        }
        let n = apply_unchecked(g, &op);
        (n.canonical_key() == *target).then_some((op, n))
    })
}
