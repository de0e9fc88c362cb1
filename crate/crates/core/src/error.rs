use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("index out of range: {0}")]
    Index(String),

    #[error("conflicting duplicate integral for {index:?}: {first} vs {second}")]
    Duplicate { index: [usize; 4], first: f64, second: f64 },

    #[error("sector mismatch: {0}")]
    Sector(String),

    #[error("capacity exceeded: {what} needs {needed}, cap is {cap}")]
    Capacity {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("register layout mismatch: {0}")]
    Layout(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("value out of range: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{context}: {source}")]
    Stage {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    /// Wraps `self` with a context label (stage name, cycle/batch index).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Stage {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error beneath any context labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
