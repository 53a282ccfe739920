//! Crate-wide error type.

/// Alias for results produced by this crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when building or solving a problem.
///
/// Numerical outcomes that are expected in normal operation (iteration
/// budgets, detected infeasibility) are *statuses* on results, not errors;
/// this enum covers structurally invalid inputs and hard failures.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "quadratic matrix must be symmetric positive semidefinite (min eigenvalue {min_eig:.3e})"
    )]
    NotPsd { min_eig: f64 },

    #[error("quadratic matrix must be square and match the linear term")]
    MalformedQuadratic,

    #[error("scale coefficient must be nonnegative and finite, got {0}")]
    NegativeScale(f64),

    #[error("expression list must be non-empty")]
    EmptyExprList,

    #[error("children of a max node must be constant, affine, or quadratic")]
    UnsupportedMaxChild,

    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("a vector problem needs at least two objectives")]
    TooFewObjectives,

    #[error("invalid box: bounds must be finite with lo[i] <= hi[i] in every coordinate")]
    InvalidBox,

    #[error("anchor point is infeasible (max violation {violation:.3e})")]
    InfeasibleAnchor { violation: f64 },

    #[error("weights must be finite and nonnegative with at least one positive entry")]
    InvalidWeights,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("backend `{backend}` cannot solve this subproblem: {reason}")]
    BackendUnsupported { backend: String, reason: String },

    #[error("unknown solver backend `{0}`")]
    UnknownBackend(String),

    #[error("warm start must lie within the box")]
    WarmStartOutsideBox,

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u64 },

    #[error("operation supports dimension up to {max}, problem has {got}")]
    DimensionTooLarge { max: usize, got: usize },

    #[error("objective vectors must be finite and share a common length")]
    RaggedInput,

    #[error("unknown problem id `{0}`")]
    UnknownProblem(String),

    #[error("invalid problem parameters: {0}")]
    InvalidProblemParams(String),

    #[error("start sampling exceeded {0} rejections without finding a feasible point")]
    SamplingFailed(usize),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("subdifferential generator set too large ({0} points)")]
    GeneratorBlowup(usize),

    #[error("invalid problem description: {0}")]
    InvalidSchema(String),
}
