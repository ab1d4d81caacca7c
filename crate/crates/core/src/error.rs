use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("{path}: expected {expected} bytes, found {found}")]
    Truncated {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("allele frequency undefined: column has no called genotypes")]
    UndefinedFrequency,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not found: {0}")]
    Lookup(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("requested {requested} components but the data only support rank {achievable}")]
    Rank { requested: usize, achievable: usize },

    #[error("infeasible case count: {0}")]
    Feasibility(String),

    #[error("invalid disease model: {0}")]
    ModelValidity(String),

    #[error("no usable data: {0}")]
    NoUsableData(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether the error stems from user-supplied configuration or arguments
    /// rather than from the data being processed.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Config(_) | Error::ModelValidity(_) | Error::Lookup(_)
        )
    }
}
