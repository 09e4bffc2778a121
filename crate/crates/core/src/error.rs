use thiserror::Error;

use crate::network::ValidationReport;

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("taxa: {0}")]
    Taxa(String),
    #[error("vertex or edge id out of range: {0}")]
    DanglingId(String),
    #[error("invalid network: {0}")]
    Invalid(ValidationReport),
    #[error("taxa sets differ")]
    TaxaMismatch,
}

/// Error raised while reading extended Newick.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("semantic error at offset {offset}: {message}")]
    Semantic { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::Semantic { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("edge {0} does not exist")]
    UnknownEdge(u32),
    #[error("pruned edge must leave an inner tree vertex")]
    TailNotTreeVertex,
    #[error("pruned edge must enter a reticulation")]
    HeadNotReticulation,
    #[error("target edge is a descendant of the pruned edge's head")]
    TargetIsDescendant,
    #[error("target edge is an ancestor of the pruned edge's tail")]
    TargetIsAncestor,
    #[error("target edge coincides with the pruned edge")]
    TargetIsMovedEdge,
    #[error("operation kind not permitted by the {0} operation set")]
    NotInOpSet(&'static str),
    #[error("rSPR operations apply to trees only")]
    NotATree,
}

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error("pruning precondition violated: {0}")]
    Pruning(String),
    #[error("embedding change precondition violated: {0}")]
    EmbeddingChange(String),
    #[error("normalization precondition violated: {0}")]
    Normalization(String),
    #[error("taxa sets differ")]
    TaxaMismatch,
    #[error("invalid decomposition: {0}")]
    Decomposition(String),
    #[error("search budget of {0} states exceeded")]
    BudgetExceeded(usize),
}

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("taxa sets differ")]
    TaxaMismatch,
    #[error("rSPR distance needs two trees")]
    NotATree,
    #[error("reticulation cap {cap} is below max(r, r') = {needed}")]
    CapTooSmall { cap: usize, needed: usize },
    #[error("search budget of {budget} states exceeded; distance is at least {lower_bound}")]
    BudgetExceeded { budget: usize, lower_bound: usize },
    #[error("search space exhausted without connecting the networks")]
    Disconnected,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("sequence builder invariant breach: {0}")]
    Invariant(String),
    #[error(transparent)]
    Agreement(#[from] AgreementError),
    #[error(transparent)]
    Op(#[from] OpError),
}
