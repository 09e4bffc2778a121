//! Rewriting PR-sequences as SNPR-sequences.

use crate::canonical::{isomorphism, Canonical, CanonicalKey};
use crate::error::DistanceError;
use crate::graph::EdgeId;
use crate::network::PhyloNetwork;
use crate::rearrangement::{
    apply_op, enumerate_ops, find_connecting_op, OpKind, OpSet, RearrangementOp,
};

use super::sequence::{verify_sequence, RearrangementSequence, Step};

/// Readdresses `op` from the ids of `from` to those of the isomorphic `to`.
fn translate(op: RearrangementOp, from: &PhyloNetwork, to: &PhyloNetwork) -> RearrangementOp {
    if from.graph() == to.graph() {
        return op;
    }
    let (_, emap) = isomorphism(from.graph(), to.graph())
        .expect("converted prefix is isomorphic to the original");
    let m = |e: EdgeId| EdgeId(emap[e.index()]);
    match op {
        RearrangementOp::Pr0Tail { moved, target } => RearrangementOp::Pr0Tail {
            moved: m(moved),
            target: m(target),
        },
        RearrangementOp::Pr0Head { moved, target } => RearrangementOp::Pr0Head {
            moved: m(moved),
            target: m(target),
        },
        RearrangementOp::PrPlus { moved, target } => RearrangementOp::PrPlus {
            moved: m(moved),
            target: m(target),
        },
        RearrangementOp::PrMinus { edge } => RearrangementOp::PrMinus { edge: m(edge) },
    }
}

/// A removal from `mid` whose result has key `key`.
fn completing_removal(
    mid: &PhyloNetwork,
    key: &CanonicalKey,
) -> Option<(RearrangementOp, PhyloNetwork)> {
    enumerate_ops(mid, OpSet::Snpr)
        .into_iter()
        .filter(|o| o.kind() == OpKind::PrMinus)
        .find_map(|o| {
            let n = apply_op(mid, &o).ok()?;
            (n.canonical_key() == *key).then_some((o, n))
        })
}

/// Steps that realise a head move on `cur` ending at `key` with at most two
/// SNPR operations.
fn simulate_head_move(
    cur: &PhyloNetwork,
    moved: EdgeId,
    target: EdgeId,
    key: &CanonicalKey,
) -> Option<Vec<(RearrangementOp, PhyloNetwork)>> {
    let plus = RearrangementOp::PrPlus {
        moved: target,
        target: moved,
    };
    if let Ok(mid) = apply_op(cur, &plus) {
        if let Some((minus, next)) = completing_removal(&mid, key) {
            return Some(vec![(plus, mid), (minus, next)]);
        }
    }
    if let Some(one) = find_connecting_op(cur, OpSet::Snpr, key) {
        return Some(vec![one]);
    }
    enumerate_ops(cur, OpSet::Snpr)
        .into_iter()
        .filter(|o| o.kind() == OpKind::PrPlus)
        .find_map(|plus| {
            let mid = apply_op(cur, &plus).ok()?;
            let (minus, next) = completing_removal(&mid, key)?;
            Some(vec![(plus, mid), (minus, next)])
        })
}

/// Replaces every head move `e -> f` by the addition that subdivides `e`
/// with a new tail and `f` with a new head, followed by the removal that
/// restores the network after the head move. Other steps are copied, with
/// edge ids readdressed once an earlier replacement has renumbered them.
pub fn pr_to_snpr_sequence(
    seq: &RearrangementSequence,
) -> Result<RearrangementSequence, DistanceError> {
    let rep = verify_sequence(seq);
    if !rep.ok {
        return Err(DistanceError::Precondition(format!(
            "input sequence: {rep}"
        )));
    }
    let mut orig = seq.start.clone();
    let mut cur = seq.start.clone();
    let mut steps = Vec::with_capacity(2 * seq.len());
    for s in &seq.steps {
        let op = translate(s.op, &orig, &cur);
        match op {
            RearrangementOp::Pr0Head { moved, target } => {
                let done = simulate_head_move(&cur, moved, target, &s.key).ok_or_else(|| {
                    DistanceError::Invariant("no SNPR steps complete the head move".into())
                })?;
                for (op, net) in done {
                    steps.push(Step {
                        op,
                        key: net.canonical_key(),
                    });
                    cur = net;
                }
            }
            op => {
                cur = apply_op(&cur, &op)?;
                steps.push(Step {
                    op,
                    key: s.key.clone(),
                });
            }
        }
        orig = apply_op(&orig, &s.op)?;
    }
    Ok(RearrangementSequence {
        start: seq.start.clone(),
        steps,
        ops: OpSet::Snpr,
        end: seq.end.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newick::parse_enewick;

    #[test]
    fn head_move_becomes_two_steps() {
        let n = parse_enewick("((1,(2)#H1),(#H1,3));").unwrap();
        let head = enumerate_ops(&n, OpSet::Pr)
            .into_iter()
            .find(|o| o.kind() == OpKind::Pr0Head)
            .unwrap();
        let seq = RearrangementSequence::from_ops(n, OpSet::Pr, &[head]).unwrap();
        let out = pr_to_snpr_sequence(&seq).unwrap();
        assert_eq!(out.len(), 2);
        assert!(verify_sequence(&out).ok, "{}", verify_sequence(&out));
    }

    #[test]
    fn tail_moves_are_copied() {
        let n = parse_enewick("((1,2),3);").unwrap();
        let op = enumerate_ops(&n, OpSet::Rspr)[0];
        let seq = RearrangementSequence::from_ops(n, OpSet::Pr, &[op]).unwrap();
        let out = pr_to_snpr_sequence(&seq).unwrap();
        assert_eq!(out.steps, seq.steps);
    }

    #[test]
    fn later_steps_are_readdressed_after_a_head_move() {
        let start = parse_enewick("(((1)#H1,((2)#H2,3)),(#H1,#H2));").unwrap();
        let mut cur = start.clone();
        let mut ops = Vec::new();
        for i in 0..6 {
            let all = enumerate_ops(&cur, OpSet::Pr);
            let pick = all
                .iter()
                .filter(|o| (o.kind() == OpKind::Pr0Head) == (i % 2 == 0))
                .nth(i)
                .or(all.first())
                .copied()
                .unwrap();
            cur = apply_op(&cur, &pick).unwrap();
            ops.push(pick);
        }
        let seq = RearrangementSequence::from_ops(start, OpSet::Pr, &ops).unwrap();
        let out = pr_to_snpr_sequence(&seq).unwrap();
        assert!(verify_sequence(&out).ok, "{}", verify_sequence(&out));
        assert!(out.len() <= 2 * seq.len());
        assert!(out.steps.iter().all(|s| s.op.kind() != OpKind::Pr0Head));
    }
}
