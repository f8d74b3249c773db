use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("enumeration budget exceeded: m={m}, n={n} needs {needed} paths, cap is {cap}")]
    BudgetExceeded {
        m: usize,
        n: usize,
        needed: u128,
        cap: u64,
    },

    #[error("dense materialization of {size} x {size} exceeds cap {cap}")]
    DenseCapExceeded { size: u128, cap: usize },

    #[error("matrix is not unitary: max |U^dag U - I| = {residual:e} exceeds {tolerance:e}")]
    NotUnitary { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("initial state is not normalized: |psi| = {norm}")]
    NotNormalized { norm: f64 },

    #[error("invalid time range: r={r} > s={s}")]
    InvalidTimeRange { r: usize, s: usize },

    #[error("no step matrix available for step {step} (system has {available})")]
    MissingStep { step: usize, available: usize },

    #[error("rank mismatch: expected {expected}, got {actual}")]
    RankMismatch { expected: usize, actual: usize },

    #[error("site {site} out of range for m={m}")]
    SiteOutOfRange { site: usize, m: usize },

    #[error("path index {index} out of range for rank {rank}")]
    IndexOutOfRange { index: u64, rank: usize },

    #[error("events are not mutually disjoint")]
    NotDisjoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("coverage unavailable at rank {rank} for family {family}")]
    CoverageUnavailable { family: String, rank: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
