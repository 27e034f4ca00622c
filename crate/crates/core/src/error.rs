use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("edge list line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),

    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),

    #[error("edge {u}-{v} has invalid weight {weight} (must be finite and > 0)")]
    InvalidWeight { u: usize, v: usize, weight: f64 },

    #[error("vertex {0} has no neighbors")]
    IsolatedVertex(usize),

    #[error("graph is not connected")]
    Disconnected,

    #[error("graph has {n} vertices; the exact solver is capped at {cap}")]
    ExactCapExceeded { n: usize, cap: usize },

    #[error("{count} placements exceed the exhaustive enumeration cap of {cap}")]
    PlacementCapExceeded { count: u128, cap: u128 },

    #[error("operation requires an unweighted graph")]
    WeightedUnsupported,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("run did not terminate within {limit} {unit}")]
    NonTermination { limit: u64, unit: &'static str },
}

impl Error {
    /// True for failures that come from the run itself rather than from bad input.
    pub fn is_runtime(&self) -> bool {
        matches!(self, Error::NonTermination { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
