//! Sparse direct solve used by the Newton driver.
//!
//! Backed by faer's sparse LU with fill-reducing column ordering. The crate
//! is built without its own thread pool, so factorizations are sequential
//! and bitwise-reproducible; parallelism lives above the solver (independent
//! continuation samples).

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::LinearSolveError;
use crate::sparse::CsrMatrix;

fn to_faer(a: &CsrMatrix) -> Result<SparseColMat<usize, f64>, LinearSolveError> {
    let mut triplets = Vec::with_capacity(a.nnz());
    for r in 0..a.nrows() {
        for (c, v) in a.row(r) {
            triplets.push(Triplet::new(r, c, v));
        }
    }
    SparseColMat::try_new_from_triplets(a.nrows(), a.ncols(), &triplets)
        .map_err(|e| LinearSolveError::Backend(format!("{e:?}")))
}

fn map_lu_error(e: LuError) -> LinearSolveError {
    match e {
        LuError::SymbolicSingular { index } => LinearSolveError::StructuralSingular { index },
        LuError::Generic(err) => LinearSolveError::Backend(format!("{err:?}")),
    }
}

/// Direct solver with a cached symbolic factorization.
///
/// Newton iterations change only the numeric values of the Jacobian, never
/// its sparsity pattern, so the fill-reducing analysis is done once and the
/// numeric factorization is repeated per call.
#[derive(Default)]
pub struct SparseLuSolver {
    symbolic: Option<SymbolicLu<usize>>,
}

impl SparseLuSolver {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
        if a.nrows() != a.ncols() {
            return Err(LinearSolveError::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        if rhs.len() != a.nrows() {
            return Err(LinearSolveError::DimensionMismatch {
                expected: a.nrows(),
                got: rhs.len(),
            });
        }
        if !a.all_finite() || rhs.iter().any(|v| !v.is_finite()) {
            return Err(LinearSolveError::NonFinite);
        }
        let mat = to_faer(a)?;
        if self.symbolic.is_none() {
            let sym = SymbolicLu::try_new(mat.symbolic())
                .map_err(|e| LinearSolveError::Backend(format!("{e:?}")))?;
            self.symbolic = Some(sym);
        }
        let symbolic = self.symbolic.as_ref().unwrap().clone();
        // The backend panics on an exactly-zero pivot instead of returning an
        // error; translate that into the numerical-singularity variant.
        let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
            Lu::try_new_with_symbolic(symbolic, mat.as_ref())
        }))
        .map_err(|_| LinearSolveError::NumericalSingular)?
        .map_err(map_lu_error)?;
        let mut x = faer::Mat::<f64>::zeros(rhs.len(), 1);
        for (i, &v) in rhs.iter().enumerate() {
            x[(i, 0)] = v;
        }
        lu.solve_in_place(x.as_mut());
        let out: Vec<f64> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(LinearSolveError::NumericalSingular);
        }
        Ok(out)
    }
}

/// One-shot sparse direct solve of `A x = b`.
pub fn sparse_solve(a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>, LinearSolveError> {
    SparseLuSolver::new().solve(a, rhs)
}
