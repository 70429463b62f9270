use thiserror::Error;

/// Errors produced by the graph, tree, oracle and refinement layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("self-loop at `{0}`")]
    SelfLoop(String),
    #[error("invalid label `{0}`")]
    InvalidLabel(String),
    #[error("graph has {0} vertices, at most {max} are supported", max = crate::graph::MAX_VERTICES)]
    TooManyVertices(usize),
    #[error("label collision on `{0}`")]
    LabelCollision(String),
    #[error("graph has {n} vertices, oracle limit is {limit}")]
    SizeLimit { n: usize, limit: usize },
    #[error("empty vertex set")]
    EmptySet,
    #[error("empty graph")]
    EmptyGraph,
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("processing order is not a permutation of the non-pivot vertices: {0}")]
    BadOrder(String),
    #[error("set contains the pivot `{0}`")]
    PivotInSet(String),
    #[error("{0}")]
    Search(String),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True when the error comes from an exceeded size cap rather than bad input.
    pub fn is_size_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. } | Error::TooManyVertices(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
