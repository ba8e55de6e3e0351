use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector does not define a projective point")]
    InvalidPoint,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("atom {0} is not invertible")]
    SingularAtom(usize),
    #[error("invalid weights: {0}")]
    WeightError(String),
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),
    #[error("infinite delta: pairing underflows ({0})")]
    InfiniteDelta(String),
    #[error("infinite perturbation value")]
    InfinitePerturbation,
    #[error("centering did not converge: residual {residual:.3e} with stderr {stderr:.3e}")]
    NotConverged { residual: f64, stderr: f64 },
    #[error("enumeration of {0} paths exceeds the guard")]
    TooLarge(u128),
    #[error("operation requires a discrete ensemble")]
    NotDiscrete,
    #[error("exponential moment overflow: alpha halved below {0:.3e}")]
    MomentOverflow(f64),
    #[error("path record does not retain its group elements")]
    MissingElements,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config error at {field}: {message}")]
    ConfigError { field: String, message: String },
    #[error("no run summaries found in {0}")]
    MissingRun(String),
    #[error("unsupported schema version {0}")]
    SchemaVersion(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
