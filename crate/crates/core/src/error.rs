use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{name}` has invalid domain: {reason}")]
    InvalidDomain { name: String, reason: String },

    #[error("variable `{0}` is declared with different domains")]
    DomainConflict(String),

    #[error("frame of {size} configurations exceeds the cap of {cap}")]
    FrameTooLarge { size: u128, cap: usize },

    #[error("operands live on different frames")]
    FrameMismatch,

    #[error("variables {vars:?} are not part of the target frame")]
    VariableMismatch { vars: Vec<String> },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid mass assignment: {0}")]
    InvalidMass(String),

    #[error("total conflict: combination leaves no mass on non-empty sets")]
    TotalConflict,

    #[error("not decombinable: {0}")]
    NotDecombinable(String),

    #[error("pseudo-belief constraint violated: commonality {value} < 0")]
    NegativeCommonality { value: f64 },

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("hypergraph is not a hypertree")]
    NotAHypertree,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("graph contains a cycle through `{0}`")]
    Cyclic(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("search exceeded the limit of {0} results")]
    LimitExceeded(usize),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("at hyperedge {edge}: {source}")]
    AtEdge {
        edge: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn at_edge(edge: usize) -> impl FnOnce(Error) -> Error {
        move |source| Error::AtEdge {
            edge,
            source: Box::new(source),
        }
    }
}
