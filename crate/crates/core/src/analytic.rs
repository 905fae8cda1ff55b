//! Closed-form anchors for the one-dimensional problem: the transcendental
//! theta equation, the exact solution profile, the dimensional upper bound
//! on the parameter, and the unit/double domain rescaling.

use crate::error::{Error, Result};

/// Positive roots of `cosh(theta) = 4 theta / sqrt(2 lambda)` in ascending
/// order: two below the fold, one double root at it, none above.
#[derive(Debug, Clone)]
pub struct ThetaRoots {
    pub lambda: f64,
    pub roots: Vec<f64>,
}

impl ThetaRoots {
    pub fn lower(&self) -> Option<f64> {
        self.roots.first().copied()
    }

    pub fn upper(&self) -> Option<f64> {
        self.roots.last().copied()
    }
}

fn theta_residual(theta: f64, lambda: f64) -> f64 {
    theta.cosh() - 4.0 * theta / (2.0 * lambda).sqrt()
}

/// Bisection refined by a few Newton steps; the bracket must straddle a sign
/// change.
fn solve_bracketed(mut lo: f64, mut hi: f64, lambda: f64) -> f64 {
    let slope = 4.0 / (2.0 * lambda).sqrt();
    let f = |t: f64| theta_residual(t, lambda);
    debug_assert!(f(lo) * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..4 {
        let deriv = t.sinh() - slope;
        if deriv.abs() > 1e-14 {
            let next = t - f(t) / deriv;
            if next.is_finite() && next > 0.0 {
                t = next;
            }
        }
    }
    t
}

/// All positive roots of the theta equation for a given parameter value.
pub fn theta_roots(lambda: f64) -> Result<ThetaRoots> {
    if lambda.is_nan() || lambda <= 0.0 || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    let slope = 4.0 / (2.0 * lambda).sqrt();
    // The residual is convex with a single minimum where sinh(theta) = slope.
    let theta_min = slope.asinh();
    let g_min = theta_residual(theta_min, lambda);
    let scale = theta_min.cosh();
    let roots = if g_min > 4.0 * f64::EPSILON * scale {
        Vec::new()
    } else if g_min >= -4.0 * f64::EPSILON * scale {
        vec![theta_min, theta_min]
    } else {
        let lower = solve_bracketed(0.0, theta_min, lambda);
        let mut hi = theta_min.max(1.0);
        while theta_residual(hi, lambda) <= 0.0 {
            hi *= 2.0;
        }
        let upper = solve_bracketed(theta_min, hi, lambda);
        vec![lower, upper]
    };
    Ok(ThetaRoots { lambda, roots })
}

/// The exact fold of the continuum one-dimensional problem, from
/// `theta * tanh(theta) = 1` and `lambda = 8 / sinh(theta)^2`.
pub fn continuum_fold_1d() -> f64 {
    let f = |t: f64| t * t.tanh() - 1.0;
    let (mut lo, mut hi) = (1.0, 1.5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(lo) * f(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    8.0 / (theta.sinh() * theta.sinh())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Lower,
    Upper,
}

/// Exact solution of the one-dimensional problem on the requested branch.
#[derive(Debug, Clone, Copy)]
pub struct Analytic1d {
    pub lambda: f64,
    pub theta: f64,
}

impl Analytic1d {
    pub fn eval(&self, x: f64) -> f64 {
        2.0 * (self.theta.cosh() / (self.theta * (1.0 - 2.0 * x)).cosh()).ln()
    }

    pub fn max_value(&self) -> f64 {
        2.0 * self.theta.cosh().ln()
    }
}

/// Evaluator for the closed-form one-dimensional solution.
pub fn analytic_1d(lambda: f64, branch: BranchKind) -> Result<Analytic1d> {
    let roots = theta_roots(lambda)?;
    let theta = match (branch, roots.roots.len()) {
        (BranchKind::Lower, 1 | 2) => roots.roots[0],
        (BranchKind::Upper, 2) => roots.roots[1],
        (_, count) => {
            return Err(Error::BranchUnavailable {
                lambda,
                branch: match branch {
                    BranchKind::Lower => "lower",
                    BranchKind::Upper => "upper",
                },
                roots: count,
            })
        }
    };
    Ok(Analytic1d { lambda, theta })
}

/// No solution exists above `d * pi^2 / e`.
pub fn lambda_upper_bound(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::InvalidParameter(format!(
            "dimension must be at least 1, got {d}"
        )));
    }
    Ok(d as f64 * std::f64::consts::PI.powi(2) / std::f64::consts::E)
}

/// Parameter conversion between the unit cube `[0,1]^d` and the double cube
/// `[-1,1]^d`: the same solution profile carries `lambda_unit = 4 *
/// lambda_double`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainScale {
    UnitToDouble,
    DoubleToUnit,
}

pub fn domain_scale(lambda: f64, direction: DomainScale) -> f64 {
    match direction {
        DomainScale::UnitToDouble => lambda / 4.0,
        DomainScale::DoubleToUnit => lambda * 4.0,
    }
}
