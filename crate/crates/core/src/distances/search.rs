//! Exact rearrangement distances by bidirectional breadth-first search over
//! canonical keys.

use std::collections::HashMap;

use log::debug;
use rayon::prelude::*;

use crate::canonical::{Canonical, CanonicalKey};
use crate::error::DistanceError;
use crate::network::PhyloNetwork;
use crate::rearrangement::{apply_unchecked, enumerate_ops_capped, find_connecting_op, OpSet};

use super::sequence::{RearrangementSequence, Step};
use super::{DistanceResult, Metric, SearchOptions, Witness};

const CHUNK: usize = 256;

/// Distinct neighbours of `g` within the reticulation cap.
pub(crate) fn capped_neighbors(
    g: &PhyloNetwork,
    ops: OpSet,
    cap: usize,
) -> Vec<(CanonicalKey, PhyloNetwork)> {
    let mut list = Vec::new();
    enumerate_ops_capped(g, ops, g.reticulation_count() < cap, &mut list);
    let own = g.canonical_key();
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for op in list {
        let h = apply_unchecked(g, &op);
        let k = h.canonical_key();
        if k != own && seen.insert(k.clone()) {
            out.push((k, h));
        }
    }
    out
}

struct Side {
    parent: HashMap<CanonicalKey, Option<CanonicalKey>>,
    frontier: Vec<(CanonicalKey, PhyloNetwork)>,
    /// Depth of the frontier; every state up to this depth is known.
    depth: usize,
}

impl Side {
    fn new(g: &PhyloNetwork) -> Self {
        let k = g.canonical_key();
        Side {
            parent: HashMap::from([(k.clone(), None)]),
            frontier: vec![(k, g.clone())],
            depth: 0,
        }
    }

    fn chain(&self, from: &CanonicalKey) -> Vec<CanonicalKey> {
        let mut out = vec![from.clone()];
        while let Some(Some(p)) = self.parent.get(out.last().unwrap()) {
            out.push(p.clone());
        }
        out
    }
}

/// Outcome of a search: the keys along a shortest path and whether the cap
/// could have hidden a shorter one.
pub(crate) struct Found {
    pub keys: Vec<CanonicalKey>,
    pub exhausted: bool,
}

/// Bidirectional search between `a` and `b` in the space of networks with at
/// most `cap` reticulations. Expanding a state at the cap would create a
/// child with `cap + 1` reticulations at depth `t`, which needs at least
/// `cap + 1 - r(other end)` further steps; the result is flagged as not
/// exhausted when such a detour could be shorter than the distance found.
pub(crate) fn bidirectional(
    a: &PhyloNetwork,
    b: &PhyloNetwork,
    ops: OpSet,
    cap: usize,
    budget: Option<usize>,
) -> Result<Found, DistanceError> {
    let ka = a.canonical_key();
    if ka == b.canonical_key() {
        return Ok(Found {
            keys: vec![ka],
            exhausted: true,
        });
    }
    let ends_r = [a.reticulation_count(), b.reticulation_count()];
    let plus = ops != OpSet::Rspr;
    let mut sides = [Side::new(a), Side::new(b)];
    let mut min_detour = usize::MAX;
    loop {
        let me = if sides[0].frontier.len() <= sides[1].frontier.len() {
            0
        } else {
            1
        };
        let other = 1 - me;
        let frontier = std::mem::take(&mut sides[me].frontier);
        if frontier.is_empty() {
            return Err(DistanceError::Disconnected);
        }
        let child_depth = sides[me].depth + 1;
        let detour = |d: &mut usize| {
            *d = (*d).min(child_depth + cap + 1 - ends_r[other].min(cap + 1));
        };
        let mut next = Vec::new();
        let mut meet: Option<CanonicalKey> = None;
        let mut done_upto = 0;
        'outer: for (ci, chunk) in frontier.chunks(CHUNK).enumerate() {
            let expanded: Vec<Vec<(CanonicalKey, PhyloNetwork)>> = chunk
                .par_iter()
                .map(|(_, g)| capped_neighbors(g, ops, cap))
                .collect();
            for (j, ((pk, g), nbrs)) in chunk.iter().zip(expanded).enumerate() {
                done_upto = ci * CHUNK + j + 1;
                if plus && g.reticulation_count() >= cap {
                    detour(&mut min_detour);
                }
                for (k, h) in nbrs {
                    if sides[me].parent.contains_key(&k) {
                        continue;
                    }
                    sides[me].parent.insert(k.clone(), Some(pk.clone()));
                    if sides[other].parent.contains_key(&k) {
                        meet = Some(k);
                        break 'outer;
                    }
                    next.push((k, h));
                }
                if let Some(limit) = budget {
                    let total = sides[0].parent.len() + sides[1].parent.len();
                    if total > limit {
                        return Err(DistanceError::BudgetExceeded {
                            budget: limit,
                            lower_bound: sides[0].depth + sides[1].depth + 1,
                        });
                    }
                }
            }
        }
        if let Some(m) = meet {
            for (_, g) in &frontier[done_upto..] {
                if plus && g.reticulation_count() >= cap {
                    detour(&mut min_detour);
                }
            }
            let mut keys = sides[me].chain(&m);
            keys.reverse();
            keys.extend(sides[other].chain(&m).into_iter().skip(1));
            if me == 1 {
                keys.reverse();
            }
            let d = keys.len() - 1;
            debug!(
                "search met at depth {}+{}, {} states",
                child_depth,
                sides[other].depth,
                sides[0].parent.len() + sides[1].parent.len()
            );
            return Ok(Found {
                keys,
                exhausted: min_detour >= d,
            });
        }
        sides[me].frontier = next;
        sides[me].depth = child_depth;
    }
}

/// Turns a key path into a sequence from `start` by recovering each step.
pub(crate) fn sequence_from_keys(
    start: &PhyloNetwork,
    keys: &[CanonicalKey],
    ops: OpSet,
) -> Result<RearrangementSequence, DistanceError> {
    let mut cur = start.clone();
    let mut steps = Vec::new();
    for k in &keys[1..] {
        let (op, next) = find_connecting_op(&cur, ops, k).ok_or_else(|| {
            DistanceError::Invariant("consecutive keys are not one operation apart".into())
        })?;
        steps.push(Step { op, key: k.clone() });
        cur = next;
    }
    Ok(RearrangementSequence {
        start: start.clone(),
        steps,
        ops,
        end: keys.last().unwrap().clone(),
    })
}

fn check_pair(n: &PhyloNetwork, np: &PhyloNetwork) -> Result<(), DistanceError> {
    if n.taxa().labels() != np.taxa().labels() {
        return Err(DistanceError::TaxaMismatch);
    }
    Ok(())
}

fn capped(
    metric: Metric,
    ops: OpSet,
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    opts: SearchOptions,
) -> Result<DistanceResult, DistanceError> {
    check_pair(n, np)?;
    let needed = n.reticulation_count().max(np.reticulation_count());
    let cap = opts.cap.unwrap_or(needed + 1);
    if cap < needed {
        return Err(DistanceError::CapTooSmall { cap, needed });
    }
    let found = bidirectional(n, np, ops, cap, opts.budget_states)?;
    let seq = sequence_from_keys(n, &found.keys, ops)?;
    Ok(DistanceResult {
        metric,
        value: seq.len(),
        exhausted: found.exhausted,
        witness: Witness::Sequence(seq),
    })
}

/// Shortest PR-sequence length among sequences whose networks have at most
/// `cap` reticulations (default `max(r, r') + 1`).
pub fn pr_distance(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    opts: SearchOptions,
) -> Result<DistanceResult, DistanceError> {
    capped(Metric::Pr, OpSet::Pr, n, np, opts)
}

/// As [`pr_distance`] without head moves.
pub fn snpr_distance(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    opts: SearchOptions,
) -> Result<DistanceResult, DistanceError> {
    capped(Metric::Snpr, OpSet::Snpr, n, np, opts)
}

/// rSPR distance of two trees; the cap does not apply.
pub fn rspr_distance(
    t: &PhyloNetwork,
    tp: &PhyloNetwork,
    opts: SearchOptions,
) -> Result<DistanceResult, DistanceError> {
    check_pair(t, tp)?;
    if !t.is_tree() || !tp.is_tree() {
        return Err(DistanceError::NotATree);
    }
    let found = bidirectional(t, tp, OpSet::Rspr, 0, opts.budget_states)?;
    let seq = sequence_from_keys(t, &found.keys, OpSet::Rspr)?;
    Ok(DistanceResult {
        metric: Metric::Rspr,
        value: seq.len(),
        exhausted: true,
        witness: Witness::Sequence(seq),
    })
}
