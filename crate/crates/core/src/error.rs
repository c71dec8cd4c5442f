use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("insufficient data: {usable} usable samples in window, need at least {needed}")]
    InsufficientData { usable: usize, needed: usize },

    #[error("identically zero on window")]
    IdenticallyZero,

    #[error("no grid point lies below cutoff {cutoff}")]
    EmptyCheck { cutoff: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular moment system (n = {n}, q = {q})")]
    SingularMomentSystem { n: usize, q: u32 },

    #[error("test function must be unscaled and untranslated (scale {scale}, shift {shift:?})")]
    NotCanonical { scale: f64, shift: Vec<f64> },

    #[error("support of test function (center {center:?}, radius {radius}) is not contained in the domain")]
    DomainGuard { center: Vec<f64>, radius: f64 },

    #[error("compact set is not contained in the domain: point {0:?}")]
    CompactNotInDomain(Vec<f64>),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("derivative order exhausted")]
    DerivativeOrderExhausted,

    #[error("domain is not connected")]
    Disconnected,

    #[error("missing compact-support certificate for generalized point")]
    MissingSupport,

    #[error("evidence too thin: {0}")]
    ThinEvidence(String),

    #[error("matrix of size {0} exceeds the cofactor-expansion limit of 6")]
    MatrixTooLarge(usize),

    #[error("matrix is not square")]
    NotSquare,

    #[error("expression error: {0}")]
    Expr(String),

    #[error("unknown generator {0}")]
    UnknownGenerator(String),

    #[error("value is not real: {0}")]
    NotReal(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
