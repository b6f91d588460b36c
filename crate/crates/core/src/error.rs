use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("color {color} out of range for q = {q}")]
    ColorOutOfRange { color: usize, q: usize },
    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("self-loop {{{0},{0}}} is not allowed in a target graph")]
    SelfLoop(usize),
    #[error("constraint graph has self-loops; construction is defined for loop-free graphs only")]
    ConstraintHasSelfLoops,
    #[error("{{{0},{1}}} is not an edge of the constraint graph")]
    NotAnEdge(usize, usize),
    #[error("{{{0},{1}}} is an edge of the constraint graph; a hard-constraint pair is required")]
    NotAHardPair(usize, usize),
    #[error("constraint graph is disconnected")]
    Disconnected,
    #[error("constraint graph has no hard constraint (H = K_q^+)")]
    NoHardConstraint,
    #[error("no valid configuration exists")]
    Unsatisfiable,
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("search budget exhausted")]
    Timeout,
    #[error("empty sample set")]
    EmptySamples,
    #[error("graphs are not nested: E(sub) is not contained in E(sup)")]
    NotNested,
    #[error("condition holds for edge {{{0},{1}}}; no counterexample exists")]
    ConditionHolds(usize, usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code for the command-line contract: 2 for caps and
    /// timeouts, 1 for every other domain error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded(_) | Error::Timeout => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
