//! Plain Newton iteration with a sparse direct linear solve.
//!
//! No damping or line search: robustness near folds is delegated to the
//! fixed-amplitude formulation, which keeps the Jacobian regular there.

use crate::error::{Error, Result};
use crate::linsolve::SparseLuSolver;
use crate::system::NonlinearSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Stop when the update sup-norm drops below this.
    pub tolerance: f64,
    /// Iteration cap; reaching it is reported as non-convergence.
    pub max_iterations: usize,
    /// Residual sup-norm beyond which the iteration is declared divergent.
    pub divergence_cap: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 100,
            divergence_cap: 1e12,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        let valid = self.tolerance > 0.0;
        if !valid {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Why a solve stopped without converging.
#[derive(Debug, Clone, PartialEq)]
pub enum FailureReason {
    MaxIterations,
    SingularJacobian(String),
    Diverged { residual_norm: f64 },
    NonFinite,
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureReason::MaxIterations => write!(f, "iteration cap reached"),
            FailureReason::SingularJacobian(why) => write!(f, "singular Jacobian: {why}"),
            FailureReason::Diverged { residual_norm } => {
                write!(f, "diverged (residual {residual_norm:.3e})")
            }
            FailureReason::NonFinite => write!(f, "non-finite iterate"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionState {
    pub unknowns: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<FailureReason>,
}

impl SolutionState {
    pub fn sup_norm(values: &[f64]) -> f64 {
        values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Runs Newton's method from `initial` until the update sup-norm drops below
/// the tolerance. Singular solves, divergence, and the iteration cap are
/// reported in the returned state, not as errors.
pub fn newton_solve<S: NonlinearSystem + ?Sized>(
    system: &S,
    initial: &[f64],
    config: &NewtonConfig,
) -> Result<SolutionState> {
    config.validate()?;
    if initial.len() != system.unknown_count() {
        return Err(Error::InvalidParameter(format!(
            "initial state length {} does not match system size {}",
            initial.len(),
            system.unknown_count()
        )));
    }

    let mut x = initial.to_vec();
    let mut solver = SparseLuSolver::new();
    let mut iterations = 0;

    let fail = |x: Vec<f64>, iters: usize, norm: f64, why: FailureReason| SolutionState {
        unknowns: x,
        residual_norm: norm,
        iterations: iters,
        converged: false,
        failure: Some(why),
    };

    loop {
        let residual = match system.residual(&x) {
            Ok(r) => r,
            Err(Error::NonFinite(_)) => {
                return Ok(fail(x, iterations, f64::INFINITY, FailureReason::NonFinite))
            }
            Err(e) => return Err(e),
        };
        let res_norm = SolutionState::sup_norm(&residual);
        if !res_norm.is_finite() {
            return Ok(fail(x, iterations, res_norm, FailureReason::NonFinite));
        }
        if res_norm > config.divergence_cap {
            return Ok(fail(
                x,
                iterations,
                res_norm,
                FailureReason::Diverged {
                    residual_norm: res_norm,
                },
            ));
        }
        if iterations == config.max_iterations {
            return Ok(fail(x, iterations, res_norm, FailureReason::MaxIterations));
        }

        let jacobian = system.jacobian(&x)?;
        let update = match solver.solve(&jacobian, &residual) {
            Ok(v) => v,
            Err(e) => {
                return Ok(fail(
                    x,
                    iterations,
                    res_norm,
                    FailureReason::SingularJacobian(e.to_string()),
                ))
            }
        };
        for (xi, vi) in x.iter_mut().zip(&update) {
            *xi -= vi;
        }
        iterations += 1;

        if SolutionState::sup_norm(&update) < config.tolerance {
            let final_norm = match system.residual(&x) {
                Ok(r) => SolutionState::sup_norm(&r),
                Err(_) => f64::INFINITY,
            };
            if !x.iter().all(|v| v.is_finite()) || !final_norm.is_finite() {
                return Ok(fail(x, iterations, final_norm, FailureReason::NonFinite));
            }
            return Ok(SolutionState {
                unknowns: x,
                residual_norm: final_norm,
                iterations,
                converged: true,
                failure: None,
            });
        }
    }
}
