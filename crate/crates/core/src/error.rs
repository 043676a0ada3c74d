use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A^H| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("non-finite value encountered")]
    NonFinite,

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("invalid state vector: {0}")]
    InvalidState(String),

    #[error("query out of range: column {x}, slot {slot}")]
    QueryOutOfRange { x: usize, slot: usize },

    #[error("column {x} has {degree} nonzeros, more than d = {d}")]
    DegreeOverflow { x: usize, degree: usize, d: usize },

    #[error("duplicate entry ({x}, {y})")]
    DuplicateEntry { x: usize, y: usize },

    #[error("entry ({x}, {y}) must satisfy x <= y")]
    EntryOrder { x: usize, y: usize },

    #[error("entry ({x}, {y}) is outside the {dim}-dimensional space")]
    EntryOutOfRange { x: usize, y: usize, dim: usize },

    #[error("entry ({x}, {y}) has zero value")]
    ZeroEntry { x: usize, y: usize },

    #[error("diagonal entry ({x}, {x}) must be real")]
    ComplexDiagonal { x: usize },

    #[error("corrupt oracle: Hermitian consistency fails between columns {x} and {y}")]
    CorruptOracle { x: usize, y: usize },

    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("restriction violated: {0}")]
    RestrictionViolated(String),

    #[error("product formula invariant violated: {0}")]
    PlanInvariant(String),

    #[error("plan has {plan} terms but {terms} term evolvers were supplied")]
    TermCountMismatch { plan: usize, terms: usize },

    #[error("consecutive coin-toss values at positions {index} and {next} are equal")]
    RepeatedCoinValue { index: usize, next: usize },

    #[error("chain precondition failed at column {x} for slots ({i}, {j})")]
    ChainPrecondition { x: usize, i: usize, j: usize },

    #[error("piece is not 1-sparse at column {x}")]
    NotOneSparse { x: usize },

    #[error("coloring check '{check}' failed at column {x} for label {label}")]
    ColoringViolation {
        check: String,
        x: usize,
        label: String,
    },

    #[error("simulation error {measured:e} exceeds the target {target:e}")]
    ErrorTargetMissed { measured: f64, target: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
