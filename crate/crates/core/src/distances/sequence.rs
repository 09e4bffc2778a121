//! Rearrangement sequences and their verification.

use serde::Serialize;

use crate::canonical::{Canonical, CanonicalKey};
use crate::error::OpError;
use crate::network::{PhyloNetwork, ValidationReport};
use crate::rearrangement::{apply_op_in, check_op_in, OpSet, RearrangementOp};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub op: RearrangementOp,
    /// Canonical key of the network after this step.
    pub key: CanonicalKey,
}

/// A chain of operations from `start`, declared to end at `end`.
#[derive(Clone, Debug, Serialize)]
pub struct RearrangementSequence {
    #[serde(serialize_with = "serialize_network")]
    pub start: PhyloNetwork,
    pub steps: Vec<Step>,
    pub ops: OpSet,
    pub end: CanonicalKey,
}

fn serialize_network<S: serde::Serializer>(n: &PhyloNetwork, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&crate::newick::write_enewick(n))
}

impl RearrangementSequence {
    pub fn empty(start: PhyloNetwork, ops: OpSet) -> Self {
        let end = start.canonical_key();
        RearrangementSequence {
            start,
            steps: Vec::new(),
            ops,
            end,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Builds a sequence by applying `ops` in order; the end is the key of
    /// the last network.
    pub fn from_ops(
        start: PhyloNetwork,
        set: OpSet,
        ops: &[RearrangementOp],
    ) -> Result<Self, OpError> {
        let mut cur = start.clone();
        let mut steps = Vec::with_capacity(ops.len());
        for op in ops {
            cur = apply_op_in(&cur, op, set)?;
            steps.push(Step {
                op: *op,
                key: cur.canonical_key(),
            });
        }
        let end = cur.canonical_key();
        Ok(RearrangementSequence {
            start,
            steps,
            ops: set,
            end,
        })
    }

    /// Networks after each step, starting with `start`; stops at the first
    /// invalid step.
    pub fn replay(&self) -> Result<Vec<PhyloNetwork>, (usize, OpError)> {
        let mut out = vec![self.start.clone()];
        for (i, s) in self.steps.iter().enumerate() {
            let next = apply_op_in(out.last().unwrap(), &s.op, self.ops).map_err(|e| (i, e))?;
            out.push(next);
        }
        Ok(out)
    }

    /// The network the sequence ends at.
    pub fn last_network(&self) -> Result<PhyloNetwork, (usize, OpError)> {
        Ok(self.replay()?.pop().unwrap())
    }
}

/// Replays a sequence. Rules: `opset` (operation kind not allowed), `op`
/// (operation invalid on its predecessor), `key` (recorded key differs from
/// the replayed network), `endpoint` (final network differs from `end`).
pub fn verify_sequence(seq: &RearrangementSequence) -> ValidationReport {
    let mut rep = ValidationReport::new();
    let mut cur = seq.start.clone();
    for (i, s) in seq.steps.iter().enumerate() {
        if let Err(e) = check_op_in(&cur, &s.op, seq.ops) {
            let rule = if matches!(e, OpError::NotInOpSet(_) | OpError::NotATree) {
                "opset"
            } else {
                "op"
            };
            rep.push(rule, format!("step {i} ({}): {e}", s.op));
            return rep;
        }
        cur = apply_op_in(&cur, &s.op, seq.ops).expect("checked");
        if cur.canonical_key() != s.key {
            rep.push(
                "key",
                format!("step {i} ({}) does not produce its recorded key", s.op),
            );
        }
    }
    if cur.canonical_key() != seq.end {
        rep.push("endpoint", "the final network is not the declared endpoint");
    }
    rep
}
