use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric or enum argument is out of its documented range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The input complex or graph lacks a structural property the operation needs.
    #[error("structure error: {0}")]
    Structure(String),
    /// A malformed chain, knot or embedding was passed in.
    #[error("invalid input: {0}")]
    Input(String),
    /// A randomized construction exhausted its retries.
    #[error("construction failed: {0}")]
    Construction(String),
    /// A block decomposition could not be completed.
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    /// An iteration or evaluation budget ran out before the tolerance was met.
    #[error("budget exhausted after {evaluations} evaluations: {detail}")]
    Budget { evaluations: u64, detail: String },
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) | Error::Data(_) | Error::Io(_) => 2,
            Error::Structure(_) | Error::Input(_) => 2,
            Error::Construction(_) | Error::Decomposition(_) => 3,
            Error::Budget { .. } => 4,
        }
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
