use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("not a rational number: {0:?}")]
    BadRational(String),

    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),

    #[error("labeled graph is not right-resolving: state {state} has two edges labeled {label:?}")]
    NotRightResolving { state: usize, label: String },

    #[error("shift is empty after removing inessential symbols")]
    EmptyShift,

    #[error("word {0:?} is not in the language")]
    WordNotAllowed(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("function of order {need} needs an edge graph of order at least {need}, got {have}")]
    OrderTooSmall { need: usize, have: usize },

    #[error("objects live on different edge graphs")]
    GraphMismatch,

    #[error("shift is not irreducible")]
    NotIrreducible,

    #[error("rotation set is not full-dimensional (affine dimension {affine_dim} < {dim}); drop a redundant coordinate of the constraint")]
    NotFullDimensional { dim: usize, affine_dim: usize },

    #[error("rank condition fails: rotation vector differences span fewer than {dim} dimensions")]
    RankDeficient { dim: usize },

    #[error("target lies outside the open simplex of the cycle rotation vectors (weights {weights})")]
    TargetOutsideSimplex { weights: String },

    #[error("word {0:?} is not synchronizing")]
    NotSynchronizing(String),

    #[error("cycle {cycle:?} does not start with the synchronizing word {prefix:?}")]
    MissingPrefix { cycle: String, prefix: String },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("BoundaryRotationVector: h = ({0}) lies on the boundary of the rotation set")]
    BoundaryRotationVector(String),

    #[error("no admissible t up to the ceiling {ceiling} (needs at least {needed})")]
    TCeilingExceeded { ceiling: u64, needed: String },

    #[error("retry schedule exhausted: {0}")]
    RetryExhausted(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotFullDimensional { .. } | Error::RankDeficient { .. } => 3,
            Error::Infeasible(_) | Error::Unbounded => 4,
            Error::BoundaryRotationVector(_) => 5,
            Error::RetryExhausted(_) | Error::TCeilingExceeded { .. } => 6,
            Error::Internal(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
