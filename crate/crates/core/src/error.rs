//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set of {n} variables exceeds the supported maximum")]
    GroundSetTooLarge { n: usize },

    #[error("variable index {index} out of range for {n} variables")]
    VariableOutOfRange { index: usize, n: usize },

    #[error("atoms must name a nonempty variable set")]
    EmptyAtom,

    #[error("sets must be pairwise disjoint: {context}")]
    NotDisjoint { context: String },

    #[error("conditional partition must cover all variables exactly once")]
    InvalidPartition,

    #[error("atom {atom} is not contained in the given atom set")]
    AtomNotInSet { atom: String },

    #[error("invalid probability model: {0}")]
    Model(String),

    #[error("absolute continuity violated: P({event}) > 0 but Q({event}) = 0")]
    AbsoluteContinuity { event: String },

    #[error("cannot condition on an event of probability zero: {event}")]
    ZeroProbabilityEvent { event: String },

    #[error("reference distribution Q is required for this functional")]
    MissingQ,

    #[error("invalid algebraic model: {0}")]
    Algebra(String),

    #[error("invalid graph: {0}")]
    Graph(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("verification failed: {0}")]
    Verification(String),
}
