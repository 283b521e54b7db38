use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("singular matrix (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("vector {index} is numerically dependent on its predecessors (residual {residual:e})")]
    RankDeficient { index: usize, residual: f64 },

    #[error("resolvent is not computable for operator kind `{0}`")]
    NonComputableResolvent(&'static str),

    #[error("Id + L is numerically singular (condition estimate {condition:e})")]
    SingularResolvent { condition: f64 },

    #[error("affine map is not monotone: symmetric part has eigenvalue {min_eigenvalue:e}")]
    MonotonicityViolation { min_eigenvalue: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("unknown form `{0}`")]
    UnknownForm(String),

    #[error("evaluation failed at sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors raised by the numerical layer rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::SingularMatrix { .. }
            | Error::SingularResolvent { .. }
            | Error::RankDeficient { .. }
            | Error::NonFinite(_) => true,
            Error::Sample { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
