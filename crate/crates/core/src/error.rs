use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bound exceeded: {what} reached {value} (limit {limit})")]
    BoundExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("not a subgroup: {0}")]
    NotSubgroup(String),

    #[error("unknown subgroup id {0}")]
    UnknownSubgroupId(usize),

    #[error("stabilizer {0} is not in the family")]
    StabilizerNotInFamily(usize),

    #[error("object mismatch: {0}")]
    ObjectMismatch(String),

    #[error("unknown object {0}")]
    UnknownObject(String),

    #[error("module map is not natural: {0}")]
    NotNatural(String),

    #[error("requested depth {requested} but the tower only has {available} levels")]
    DepthExceeded { requested: usize, available: usize },

    #[error("incompatible resolution: {0}")]
    IncompatibleResolution(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BoundExceeded { .. } => 3,
            Error::Invariant(_) => 1,
            _ => 2,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> Error {
    Error::Invariant(msg.into())
}
