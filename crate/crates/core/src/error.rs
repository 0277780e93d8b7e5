use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid Orlicz function: {0}")]
    InvalidOrliczFunction(String),

    #[error("function sample {index} is not finite ({value})")]
    NonFiniteFunction { index: usize, value: f64 },

    #[error("degenerate range: lower bound {lo} must be below upper bound {hi}")]
    DegenerateRange { lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid measure space: {0}")]
    InvalidMeasureSpace(String),

    #[error("invalid atom map: {0}")]
    InvalidAtomMap(String),

    #[error("absolute continuity violated at atom {atom}: null atom carries pushforward mass")]
    AbsoluteContinuityViolated { atom: usize },

    #[error("carrier mismatch: {left} atoms vs {right} atoms")]
    CarrierMismatch { left: usize, right: usize },

    #[error("measures are not equivalent: atom {atom} is null for exactly one of them")]
    NotEquivalent { atom: usize },

    #[error("transformation is singular: atom {preimage} has positive mass but maps to null atom {atom}")]
    SingularTransformation { preimage: usize, atom: usize },

    #[error("theorem violation: {0}")]
    TheoremViolation(String),

    #[error("ascent not reached within {max_k} steps")]
    AscentLimitExceeded { max_k: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("map sends a point to {point:?}, outside the domain")]
    MapEscapesDomain { point: Vec<f64> },

    #[error("affine matrix is singular (|det| = {det:e})")]
    SingularMatrix { det: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("{atoms} atoms exceed the enumeration limit of {max}")]
    TooManyAtoms { atoms: usize, max: usize },

    #[error("rejection sampling gave up after {attempts} attempts")]
    RejectionExhausted { attempts: usize },

    #[error("scenario: {0}")]
    Scenario(String),
}
