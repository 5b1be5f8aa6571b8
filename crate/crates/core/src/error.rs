use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported dimension {0}; only 1, 2 and 3 are supported")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// A sphere or stencil left the sampled grid. `required` is the
    /// axis-aligned box `[lo, hi]` per axis the grid has to cover.
    #[error("out of domain: {detail}; required box {required:?}")]
    OutOfDomain {
        detail: String,
        required: Vec<[f64; 2]>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("ill-posed problem, out of scope: {0}")]
    IllPosed(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Short machine-readable tag used by the CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::OutOfDomain { .. } => "out_of_domain",
            Error::InvalidConfig(_) => "invalid_config",
            Error::IllPosed(_) => "ill_posed",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Parse(_) => "parse",
        }
    }
}
