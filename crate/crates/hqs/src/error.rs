use crate::corpus::CorpusError;
use crate::hierarchy::{HierarchyError, ItemId, NodeId};

/// Errors raised while evaluating a hierarchy: guidance, action values,
/// planning, metrics, and the closed-form analysis all share this type.
#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),

    #[error(transparent)]
    Corpus(#[from] CorpusError),

    #[error("similarity over an empty cluster")]
    EmptyCluster,

    #[error("guidance over an empty child list")]
    NoChildren,

    #[error("item {0} is not in the catalogue")]
    UnknownItem(ItemId),

    #[error("node index {0} is out of range")]
    UnknownNode(NodeId),

    #[error("non-finite score {score} for child node {node}")]
    NonFiniteScore { node: NodeId, score: f64 },

    #[error("guidance probability {eta} outside [0, 1]")]
    InvalidEta { eta: f64 },

    #[error("cluster size {size} invalid for a corpus of {n_items} items")]
    InvalidClusterSize { size: usize, n_items: usize },

    #[error("temperature must be positive, got {0}")]
    InvalidTemperature(f64),

    #[error("temperature growth factor must be >= 1, got {0}")]
    InvalidGrowth(f64),

    #[error("sample fraction {0} outside (0, 1]")]
    InvalidFraction(f64),

    #[error("worker threads could not be started: {0}")]
    WorkerPool(String),

    #[error(
        "hierarchy and catalogue disagree: {}, {}",
        mismatch_side(.missing_in_catalogue, .first_missing_in_catalogue, "hierarchy"),
        mismatch_side(.missing_in_hierarchy, .first_missing_in_hierarchy, "catalogue")
    )]
    ItemSetMismatch {
        missing_in_catalogue: usize,
        first_missing_in_catalogue: Option<ItemId>,
        missing_in_hierarchy: usize,
        first_missing_in_hierarchy: Option<ItemId>,
    },

    #[error("the two hierarchies cover different item sets: {0}")]
    ItemCoverage(String),

    #[error("decay step must lie in (0, 1), got {0}")]
    InvalidDecay(f64),

    #[error("branch penalty must be non-negative, got {0}")]
    InvalidPenalty(f64),

    #[error("branch penalty of zero makes the optimal depth unbounded")]
    SingularPenalty,

    #[error("non-finite value produced while {context}")]
    NonFinite { context: String },
}

impl EvalError {
    /// True for failures of the numeric evaluation itself (a non-finite
    /// intermediate), as opposed to invalid inputs. The CLI maps these to a
    /// distinct exit code.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            EvalError::NonFinite { .. } | EvalError::NonFiniteScore { .. }
        )
    }
}

/// One side of the item-set mismatch message, e.g.
/// `3 item(s) only in the hierarchy (first "doc-7")`.
fn mismatch_side(count: &usize, first: &Option<ItemId>, place: &str) -> String {
    match first {
        Some(id) => format!("{count} item(s) only in the {place} (first \"{id}\")"),
        None => format!("{count} item(s) only in the {place}"),
    }
}
