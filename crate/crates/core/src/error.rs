use thiserror::Error;

/// Errors raised by the model, the integration engine and the oracle layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("variable labels do not match: {0}")]
    LabelMismatch(String),

    #[error("invalid variable index {index} for a function of {num_vars} variables")]
    InvalidIndex { index: usize, num_vars: usize },

    #[error("duplicate variable index {0}")]
    DuplicateIndex(usize),

    #[error("antisymmetrization over {size} variables exceeds the cap of {cap}")]
    AntisymmetrizationCap { size: usize, cap: usize },

    #[error("linear map is singular (|det| = {det:e})")]
    SingularMap { det: f64 },

    #[error("Gaussian moment requires a positive width parameter, got {0}")]
    NonPositiveWidth(f64),

    #[error("Gaussian is not integrable along variable {index} (pivot {pivot:e}); the quadratic form is not positive definite there")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("no bound state: the bound-state condition {condition} is violated (N = {n}, Lambda = {lambda})")]
    NoBoundState {
        n: usize,
        lambda: f64,
        condition: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid bipartition (M_a = {kept_a}, M_b = {kept_b}) for N = {n}")]
    InvalidBipartition {
        kept_a: usize,
        kept_b: usize,
        n: usize,
    },

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("purity {0} lies outside (0, 1]")]
    PurityOutOfRange(f64),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error("non-finite integrand value at sample {0}")]
    NonFinite(usize),

    #[error("serialization failed: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;
