//! Finite difference solvers for the Bratu problem `Δu + λ e^u = 0` with
//! zero Dirichlet data on the unit cube (dimensions 1 through 5) and its
//! radial reduction on the unit ball.
//!
//! The cube discretization comes in two flavors:
//!
//! * the standard full-grid scheme over all `(n-1)^d` interior points, kept
//!   as a brute-force reference, and
//! * a reduced scheme that exploits the solution's invariance under
//!   coordinate permutations and per-axis reflections, collapsing the
//!   unknowns onto nondecreasing index tuples in the fundamental simplex —
//!   roughly a `2^d d!` reduction — while reproducing the full-grid solution
//!   exactly.
//!
//! Both flavors support the classic fixed-`λ` formulation and a
//! fixed-amplitude formulation that pins `‖u‖∞ = A` and promotes `λ` to an
//! unknown. The latter walks straight through turning points without
//! arclength machinery, which is what the continuation and turning-point
//! modules are built on.
//!
//! Module map:
//!
//! * [`grid`], [`symmetry`] — grid geometry and the reflect/sort/rank maps.
//! * [`cube`], [`ball`] — system assembly (stencils, Jacobians, fields).
//! * [`newton`], [`linsolve`] — Newton iteration over a sparse direct solve.
//! * [`continuation`], [`spline`] — amplitude sweeps and fold location.
//! * [`stability`] — largest real Jacobian eigenvalue along a branch.
//! * [`analytic`] — closed-form 1D anchors (theta equation, bounds).
//! * [`oracle`] — reduced-vs-full certification.
//! * [`io`] — CSV/JSON/field serialization.

pub mod analytic;
pub mod ball;
pub mod continuation;
pub mod cube;
pub mod error;
pub mod grid;
pub mod io;
pub mod linsolve;
pub mod newton;
pub mod oracle;
pub mod problem;
pub mod sparse;
pub mod spline;
pub mod stability;
pub mod symmetry;
pub mod system;

pub use analytic::{
    analytic_1d, continuum_fold_1d, domain_scale, lambda_upper_bound, theta_roots, Analytic1d,
    BranchKind, DomainScale, ThetaRoots,
};
pub use ball::{assemble_ball, BallSystem};
pub use continuation::{
    auto_window, first_turning_point, locate_turning_point, trace_branch, Branch, BranchPoint,
    TurningPointEstimate,
};
pub use cube::{
    assemble_fdm, assemble_sfdm, reconstruct_full, AssembledSystem, Formulation, FullField,
    StencilRow,
};
pub use error::{Error, LinearSolveError, Result};
pub use grid::GridSpec;
pub use newton::{newton_solve, FailureReason, NewtonConfig, SolutionState};
pub use oracle::{compare_sfdm_fdm, ComparisonReport};
pub use problem::{BratuProblem, SystemInstance};
pub use sparse::CsrMatrix;
pub use spline::{spline_max, CubicSpline};
pub use stability::{
    branch_stability, largest_real_eigenvalue, stability_at_amplitude, symmetrize_reduced,
    StabilityPoint, StabilityResult, SystemKind,
};
pub use symmetry::{binomial, reflect, variable_count, SymmetricIndexMap};
pub use system::NonlinearSystem;
