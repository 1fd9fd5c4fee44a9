use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("support set is empty")]
    EmptySupport,

    #[error("index {index} is out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("N < 2n-1: {measurements} measurements cannot resolve the autocorrelation of a length-{n} signal")]
    InsufficientOversampling { measurements: usize, n: usize },

    #[error("autocorrelation is identically zero")]
    ZeroSignal,

    #[error("infeasible support constraints: {0}")]
    Infeasible(String),

    #[error("measurement matrix {index} is not symmetric")]
    NotSymmetric { index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid experiment spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),

    #[error("{0} is not supported for this ensemble")]
    Unsupported(&'static str),
}
