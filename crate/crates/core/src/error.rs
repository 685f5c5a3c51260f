use thiserror::Error;

/// Errors raised while building kernels, analysing spectra, or running checks.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("row {row} of kernel is not stochastic (sum = {sum}, min entry = {min})")]
    NotStochastic { row: usize, sum: f64, min: f64 },

    #[error("stationary distribution is not unique (eigenvalue-1 left eigenspace has dimension {dimension})")]
    NonUniqueStationary { dimension: usize },

    #[error("kernel is not reversible: worst pair ({x}, {y}) has defect {defect:e}")]
    NotReversible { x: usize, y: usize, defect: f64 },

    #[error("stationary weight {weight:e} at state {state} is too small to analyse")]
    SingularStationary { state: usize, weight: f64 },

    #[error("no spectral gap: operator norm {norm} is not below 1")]
    NoSpectralGap { norm: f64 },

    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),

    #[error("function has zero norm after centering")]
    ZeroFunction,

    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),

    #[error("state space of {states} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("invalid product space: {0}")]
    InvalidSpace(String),

    #[error("conditioning event has zero mass (coordinates {coords:?}, complement {complement:?})")]
    NullConditioningEvent { coords: Vec<usize>, complement: Vec<usize> },

    #[error("invalid approximator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid block size {size} for {coords} coordinates: {reason}")]
    InvalidBlockSize { size: usize, coords: usize, reason: String },

    #[error("data augmentation needs exactly two coordinates, found {0}")]
    NotTwoBlock(usize),

    #[error("slice weight at state {state} is not strictly positive ({value})")]
    NonPositiveWeight { state: usize, value: f64 },

    #[error("missing kernel for slice level {0}")]
    MissingLevelKernel(usize),

    #[error("gamma({z}) = {gamma} is below the kernel norm {norm}")]
    GammaDominationViolated { z: usize, gamma: f64, norm: f64 },

    #[error("degenerate comparison constants: {0}")]
    DegenerateConstants(String),

    #[error("selection probability {index} is zero")]
    ZeroSelectionProb { index: usize },

    #[error("selection probabilities are not uniform")]
    NonUniformSelection,

    #[error("invalid start: {0}")]
    InvalidStart(String),

    #[error("too few batches: {steps} steps with batch size {batch} gives {batches} (< 20)")]
    TooFewBatches { steps: usize, batch: usize, batches: usize },

    #[error("initial distribution puts mass {mass:e} on state {state} outside the stationary support")]
    NotAbsolutelyContinuous { state: usize, mass: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("unknown demo {0:?}")]
    UnknownDemo(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
