use thiserror::Error;

/// Errors produced by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero vector has no primitive representative")]
    ZeroVector,
    #[error("basis rows are linearly dependent")]
    DependentRows,
    #[error("lattice rank {0} exceeds the supported maximum of 8")]
    RankTooLarge(usize),
    #[error("predicted point count {predicted:.3e} exceeds budget {cap}")]
    BudgetExceeded { predicted: f64, cap: u64 },
    #[error("point lies outside the chart domain of the center")]
    NotInChart,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("window reaches log-height {needed:.6} but enumeration only covers {covered:.6}")]
    IncompleteEnumeration { needed: f64, covered: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("insufficient mass: {mass} < {required}")]
    InsufficientMass { mass: u64, required: u64 },
    #[error("operation not supported for {0}")]
    UnsupportedFamily(String),
    #[error("time {t} exceeds the precision budget t <= {cap}")]
    PrecisionLoss { t: f64, cap: f64 },
    #[error("invalid variety: {0}")]
    InvalidVariety(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed point file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
