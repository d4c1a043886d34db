use thiserror::Error;

/// Errors raised while building or analysing signed opinion systems.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(usize),

    #[error("edge ({from} -> {to}) has invalid weight {weight}")]
    InvalidWeight { from: usize, to: usize, weight: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("graph contains no spanning tree")]
    NoSpanningTree,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("selector maps step {step} to graph index {index}, only {count} graphs available")]
    SelectorOutOfRange { step: usize, index: usize, count: usize },

    #[error("dwell time {0} is not a positive-integer combination of the dwell set")]
    DwellNotRepresentable(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
