use thiserror::Error;

/// Errors raised while building, tailoring, assembling or solving a problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GcsError {
    #[error("duplicate vertex name `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge `{0}`")]
    DuplicateEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid conic set: {0}")]
    InvalidSet(String),
    #[error("invalid cost atom: {0}")]
    InvalidAtom(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("vertex `{0}` violates the superlinear-cost recession condition")]
    RecessionViolated(String),
    #[error("recession check for vertex `{0}` is indeterminate: {1}")]
    RecessionIndeterminate(String, String),
    #[error("set of vertex `{0}` is unbounded")]
    UnboundedSet(String),
    #[error("conic solver failure: {0}")]
    Solver(String),
    #[error("enumeration cap of {0} subgraphs exceeded")]
    EnumerationCap(usize),
    #[error("plan does not match graph: {0}")]
    PlanMismatch(String),
    #[error("{path}: {message}")]
    Document { path: String, message: String },
    #[error("plot error: {0}")]
    Plot(String),
}

pub type Result<T, E = GcsError> = std::result::Result<T, E>;

pub(crate) fn dim_check(context: impl Into<String>, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(GcsError::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        })
    }
}
