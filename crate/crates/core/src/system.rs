//! Common contract for the nonlinear systems handed to the Newton driver.

use crate::error::Result;
use crate::sparse::CsrMatrix;

/// Square nonlinear system `F(x) = 0` with a sparse Jacobian.
///
/// Implementations are immutable after assembly; residual and Jacobian
/// evaluations are pure, so one system may be shared by concurrent solves.
pub trait NonlinearSystem: Sync {
    /// Number of unknowns (equal to the number of equations).
    fn unknown_count(&self) -> usize;

    /// Residual `F(x)`.
    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Jacobian `dF/dx` at `x`.
    fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix>;

    /// Solution values (all grid unknowns, including a pinned amplitude
    /// entry where applicable), for reporting and reconstruction.
    fn field_values(&self, x: &[f64]) -> Vec<f64>;

    /// The continuation parameter at this state: the fixed value in the
    /// fixed-lambda formulation, or the first unknown in the fixed-amplitude
    /// formulation.
    fn lambda_value(&self, x: &[f64]) -> f64;

    /// All-zero initial state of the right length.
    fn zero_state(&self) -> Vec<f64> {
        vec![0.0; self.unknown_count()]
    }
}
