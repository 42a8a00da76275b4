use thiserror::Error;

/// Errors raised by the polynomial engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolyError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("polynomial is not homogeneous: found terms of degree {first} and {second}")]
    Inhomogeneous { first: u32, second: u32 },
    #[error("dimension mismatch: expected {expected} variables, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operation requires exact coefficients")]
    InexactMode,
    #[error("all components of the map vanish identically")]
    ZeroMap,
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("map components must share degree and variable count")]
    IncompatibleComponents,
    #[error("the two points span no line (they coincide)")]
    CoincidentPoints,
    #[error("polynomials share a common factor (resultant vanishes identically)")]
    CommonFactor,
    #[error("elimination is ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("cost guard exceeded: {0}")]
    CostGuard(String),
    #[error("{0}")]
    Invalid(String),
}

/// Errors raised by projective geometry helpers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("the zero vector does not define a projective point")]
    ZeroVector,
    #[error("dimension must be at least 1")]
    BadDimension,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// Errors raised by experiments and dynamical computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("target is exceptional: found {found} preimages, expected {expected}")]
    Exceptional { found: u32, expected: u32 },
    #[error("target lies in the indeterminacy set")]
    Indeterminacy,
    #[error("preimage counts disagree on generic targets: {0:?}")]
    InconsistentDegree(Vec<u32>),
    #[error("too many aborted samples: {aborted} of {attempted}")]
    TooManyAborts { aborted: usize, attempted: usize },
    #[error("point query on a lazily represented zero set")]
    LazyZeroSet,
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type LabResult<T> = Result<T, LabError>;
