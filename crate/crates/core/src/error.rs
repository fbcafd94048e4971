use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid resolution: {0}")]
    Resolution(String),

    #[error("packet reaches the grid boundary: {0}")]
    BoundaryOverflow(String),

    #[error("state timestamp {found:.6e} s does not match the pulse start {expected:.6e} s")]
    TimestampMismatch { expected: f64, found: f64 },

    #[error("mirror position {x_m:.6e} m is not on a grid node (nearest node {nearest:.6e} m)")]
    MirrorOffGrid { x_m: f64, nearest: f64 },

    #[error("quadrature did not converge: last two values {previous:.12e} and {last:.12e}")]
    NotConverged { previous: f64, last: f64 },

    #[error("scan coverage: {0}")]
    Coverage(String),

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Wraps the error with a short description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping context layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            e => e,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
