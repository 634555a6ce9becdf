use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension {0} outside supported range 1..=30")]
    InvalidDimension(u32),

    #[error("vertex {vertex} does not fit in Q_{n}")]
    VertexOutOfRange { vertex: u32, n: u32 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A hypothesis of the requested construction does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("exception configuration: n = 3, d(u, v) = 1 and d({{x, y}}, {{u, v}}) = 2 admit no spanning path")]
    ExceptionCase,

    #[error("no split dimension keeps both halves conditionally fault-free")]
    NoValidDimension,

    #[error("search budget of {limit} nodes exceeded")]
    BudgetExceeded { limit: u64 },

    /// Exhaustive search finished without a witness.
    #[error("no solution exists: {0}")]
    Infeasible(String),

    #[error("seam {0} - {1} is not a hypercube edge")]
    SeamNotAdjacent(u32, u32),

    #[error("vertex {0} appears twice")]
    VertexCollision(u32),

    #[error("vertex {0} is not on the path")]
    VertexNotOnPath(u32),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("parse error: {0}")]
    Parse(String),
}
