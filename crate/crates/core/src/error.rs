use thiserror::Error;

use crate::graph::{GraphKind, NormKind};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("letter index {index} is out of range for d = {d} (alphabet has {} letters)", 2 * d)]
    LetterOutOfRange { index: usize, d: usize },

    #[error("norm {norm} is not defined on the {kind} graph")]
    NormMismatch { norm: NormKind, kind: GraphKind },

    #[error("vertex does not belong to the {kind} graph with d = {d}")]
    VertexMismatch { kind: GraphKind, d: usize },

    #[error("invalid coin: {0}")]
    InvalidCoin(String),

    #[error("coin acts on C^{coin} but the graph needs C^{graph}")]
    DimensionMismatch { coin: usize, graph: usize },

    #[error("skeleton matrix is not balanced (max entry deviation {deviation:.3e})")]
    NotBalanced { deviation: f64 },

    #[error("{what} needs {required} items, over the budget of {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: u128,
        budget: u128,
    },

    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("class invariant violated: {0}")]
    InvariantViolated(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
