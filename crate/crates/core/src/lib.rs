//! Rooted binary phylogenetic networks: prune-and-regraft rearrangements,
//! prunings and agreement embeddings, the agreement distance, and exact
//! rearrangement distances by search.

pub mod agreement;
pub mod canonical;
pub mod distances;
pub mod dot;
pub mod error;
mod graph;
pub mod network;
pub mod newick;
pub mod pruned;
pub mod random;
pub mod rearrangement;
pub mod report;
pub mod taxa;

pub use agreement::{
    agreement_distance, agreement_distance_with, apply_pruning, apply_prunings,
    certify_agreement_graph, embedding_change, enumerate_prunings, find_agreement_embedding,
    is_agreement_graph, normal_form_violations, normalize_embedding, verify_agreement_embedding,
    verify_agreement_witness, AgreementCertificate, AgreementDistance, AgreementEmbedding,
    AgreementGraph, AgreementOptions, Attachment, PruneEnd, Pruning,
};
pub use canonical::{Canonical, CanonicalKey};
pub use distances::{
    ad_distance, build_pr_sequence, mag_to_pr_sequence, pr_distance, pr_to_snpr_sequence,
    rspr_distance, snpr_distance, verify_sequence, BuildTrace, CaseRecord, DistanceResult, Metric,
    NetworkSpace, RearrangementSequence, SearchOptions, Step, Witness,
};
pub use error::{AgreementError, DistanceError, NetworkError, OpError, ParseError};
pub use graph::{EdgeId, Label, VertexId};
pub use network::{PhyloNetwork, ValidationReport, VertexKind, Violation};
pub use newick::{parse_enewick, parse_enewick_with_taxa, write_enewick};
pub use pruned::{PrunedGraph, VertexClass};
pub use random::{enumerate_trees, random_network, random_tree};
pub use rearrangement::{
    apply_op, apply_op_in, check_op, check_op_in, enumerate_neighbors, enumerate_ops,
    find_connecting_op, is_valid_op, Neighbor, OpKind, OpSet, RearrangementOp,
};
pub use taxa::{TaxaSet, ROOT_LABEL};
