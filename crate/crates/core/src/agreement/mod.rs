//! Prunings, agreement embeddings, agreement graphs and the agreement
//! distance.

pub mod distance;
pub mod embedding;
pub mod graph;
pub mod pruning;

pub use distance::{
    agreement_distance, agreement_distance_with, AgreementDistance, AgreementOptions,
};
pub use embedding::{
    embedding_change, find_agreement_embedding, verify_agreement_embedding, AgreementEmbedding,
    Attachment,
};
pub use graph::{
    certify_agreement_graph, is_agreement_graph, normal_form_violations, normalize_embedding,
    verify_agreement_witness, AgreementCertificate, AgreementGraph,
};
pub use pruning::{apply_pruning, apply_prunings, enumerate_prunings, PruneEnd, Pruning};
