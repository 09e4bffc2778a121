//! Rearrangement distances, sequences and sequence builders.

mod builder;
mod search;
mod sequence;
mod snpr;
mod space;

use serde::{Deserialize, Serialize};

use crate::agreement::{agreement_distance_with, AgreementDistance, AgreementOptions};
use crate::error::DistanceError;
use crate::network::PhyloNetwork;

pub use builder::{build_pr_sequence, mag_to_pr_sequence, BuildTrace, CaseRecord};
pub use search::{pr_distance, rspr_distance, snpr_distance};
pub use sequence::{verify_sequence, RearrangementSequence, Step};
pub use snpr::pr_to_snpr_sequence;
pub use space::NetworkSpace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ad,
    Pr,
    Snpr,
    Rspr,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Ad => "ad",
            Metric::Pr => "pr",
            Metric::Snpr => "snpr",
            Metric::Rspr => "rspr",
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SearchOptions {
    /// Largest reticulation number allowed on the way; `None` means
    /// `max(r, r') + 1`.
    pub cap: Option<usize>,
    /// Largest number of states the search may visit.
    pub budget_states: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum Witness {
    Sequence(RearrangementSequence),
    Agreement(Box<AgreementDistance>),
}

/// A distance with its witness. `exhausted` is false when the reticulation
/// cap may have hidden a shorter sequence.
#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub metric: Metric,
    pub value: usize,
    pub exhausted: bool,
    pub witness: Witness,
}

/// The agreement distance as a [`DistanceResult`]; `budget_states` bounds
/// the isomorphism classes kept per pruning level.
pub fn ad_distance(
    n: &PhyloNetwork,
    np: &PhyloNetwork,
    opts: SearchOptions,
) -> Result<DistanceResult, DistanceError> {
    let mut ao = AgreementOptions::default();
    if let Some(b) = opts.budget_states {
        ao.budget = b;
    }
    let a = agreement_distance_with(n, np, ao)?;
    Ok(DistanceResult {
        metric: Metric::Ad,
        value: a.d,
        exhausted: true,
        witness: Witness::Agreement(Box::new(a)),
    })
}
