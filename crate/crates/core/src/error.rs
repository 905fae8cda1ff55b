use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error(transparent)]
    LinearSolve(#[from] LinearSolveError),

    #[error(
        "eigenvalue iteration stalled at residual {residual:.3e} after {iterations} iterations"
    )]
    EigenNoConvergence { residual: f64, iterations: usize },

    #[error("sample at A = {a} did not converge ({reason})")]
    UnconvergedSample { a: f64, reason: String },

    #[error("interpolated maximum lies at the window edge (A = {a}); recenter the window")]
    MaxAtWindowEdge { a: f64 },

    #[error("interpolation data has no interior maximum (flat or degenerate samples)")]
    DegenerateSpline,

    #[error("no {branch} branch at lambda = {lambda} ({roots} theta root(s))")]
    BranchUnavailable {
        lambda: f64,
        branch: &'static str,
        roots: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Failure modes of the sparse direct solve, kept separate so callers can
/// distinguish a structural defect from a numerical one.
#[derive(Debug, Error)]
pub enum LinearSolveError {
    #[error("structurally singular matrix (no pivot available at column {index})")]
    StructuralSingular { index: usize },

    #[error("numerically singular matrix")]
    NumericalSingular,

    #[error("matrix or right-hand side contains non-finite entries")]
    NonFinite,

    #[error("right-hand side length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver backend error: {0}")]
    Backend(String),
}

pub type Result<T> = std::result::Result<T, Error>;
