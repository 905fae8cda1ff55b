//! Branch tracing in the fixed-amplitude formulation and turning-point
//! location by dense sampling plus spline interpolation.
//!
//! Sweeping the amplitude instead of the parameter walks straight through
//! folds: each amplitude pins a unique solution, so the sweep is warm-started
//! sequentially, while turning-point samples are independent cold solves and
//! run in parallel.

use rayon::prelude::*;
use serde::Serialize;

use crate::cube::Formulation;
use crate::error::{Error, Result};
use crate::newton::{newton_solve, NewtonConfig, SolutionState};
use crate::problem::BratuProblem;
use crate::spline::spline_max;
use crate::system::NonlinearSystem;

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub a: f64,
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Whether the warm start failed and the point was re-solved from zeros.
    pub reset_used: bool,
    pub max_u: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Branch {
    pub problem: BratuProblem,
    pub a_start: f64,
    pub a_step: f64,
    pub a_end: f64,
    pub points: Vec<BranchPoint>,
}

impl Branch {
    pub fn converged_points(&self) -> impl Iterator<Item = &BranchPoint> {
        self.points.iter().filter(|p| p.converged)
    }

    /// Number of sign changes of the lambda increment between consecutive
    /// converged points: the fold count estimate.
    pub fn fold_count(&self) -> usize {
        let lambdas: Vec<f64> = self.converged_points().map(|p| p.lambda).collect();
        let mut signs = lambdas
            .windows(2)
            .map(|w| w[1] - w[0])
            .filter(|d| *d != 0.0)
            .map(f64::signum);
        let mut count = 0;
        if let Some(mut prev) = signs.next() {
            for s in signs {
                if s != prev {
                    count += 1;
                    prev = s;
                }
            }
        }
        count
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TurningPointEstimate {
    pub lambda_star: f64,
    pub a_star: f64,
    pub window_center: f64,
    pub window_halfwidth: f64,
    pub samples: usize,
}

/// Amplitude grid `a_start, a_start + a_step, ...` up to `a_end` inclusive.
fn amplitude_grid(a_start: f64, a_step: f64, a_end: f64) -> Result<Vec<f64>> {
    let valid = a_start > 0.0 && a_end >= a_start && a_step > 0.0;
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "invalid amplitude grid: start {a_start}, step {a_step}, end {a_end}"
        )));
    }
    let count = ((a_end - a_start) / a_step + 1.0 + 1e-9).floor() as usize;
    Ok((0..count).map(|i| a_start + i as f64 * a_step).collect())
}

/// Sweeps the amplitude over an arithmetic grid, warm-starting each solve
/// from the previous converged state. A failed warm start is retried once
/// from zeros; unconverged points are recorded, never dropped.
pub fn trace_branch(
    problem: &BratuProblem,
    a_start: f64,
    a_step: f64,
    a_end: f64,
    config: &NewtonConfig,
) -> Result<Branch> {
    let amplitudes = amplitude_grid(a_start, a_step, a_end)?;
    let mut points = Vec::with_capacity(amplitudes.len());
    let mut warm: Option<Vec<f64>> = None;

    for &a in &amplitudes {
        let system = problem.system(Formulation::FixedAmplitude(a))?;
        let zeros = system.zero_state();
        let initial = warm.take().unwrap_or_else(|| zeros.clone());
        let from_zeros = initial == zeros;
        let mut state = newton_solve(&system, &initial, config)?;
        let mut reset_used = false;
        if !state.converged && !from_zeros {
            reset_used = true;
            state = newton_solve(&system, &zeros, config)?;
        }
        let u = system.field_values(&state.unknowns);
        points.push(BranchPoint {
            a,
            lambda: system.lambda_value(&state.unknowns),
            iterations: state.iterations,
            converged: state.converged,
            reset_used,
            max_u: SolutionState::sup_norm(&u),
        });
        if state.converged {
            warm = Some(state.unknowns);
        }
    }

    Ok(Branch {
        problem: *problem,
        a_start,
        a_step,
        a_end,
        points,
    })
}

/// Solves the fixed-amplitude problem at `samples` evenly spaced amplitudes
/// across the window (each from zeros, in parallel) and returns the interior
/// maximum of the natural cubic spline through (A, lambda).
pub fn locate_turning_point(
    problem: &BratuProblem,
    a_center: f64,
    a_halfwidth: f64,
    samples: usize,
    config: &NewtonConfig,
) -> Result<TurningPointEstimate> {
    if samples < 5 {
        return Err(Error::InvalidParameter(format!(
            "turning-point location needs at least 5 samples, got {samples}"
        )));
    }
    let valid = a_halfwidth > 0.0 && a_center - a_halfwidth > 0.0;
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "window {a_center} +/- {a_halfwidth} must lie in A > 0"
        )));
    }
    let step = 2.0 * a_halfwidth / (samples - 1) as f64;
    let amplitudes: Vec<f64> = (0..samples)
        .map(|j| a_center - a_halfwidth + j as f64 * step)
        .collect();

    let solved: Vec<Result<(f64, f64)>> = amplitudes
        .par_iter()
        .map(|&a| {
            let system = problem.system(Formulation::FixedAmplitude(a))?;
            let state = newton_solve(&system, &system.zero_state(), config)?;
            if !state.converged {
                return Err(Error::UnconvergedSample {
                    a,
                    reason: state
                        .failure
                        .map_or_else(|| "unknown".into(), |f| f.to_string()),
                });
            }
            Ok((a, system.lambda_value(&state.unknowns)))
        })
        .collect();

    let mut points = Vec::with_capacity(samples);
    for s in solved {
        points.push(s?);
    }
    let (a_star, lambda_star) = spline_max(&points)?;
    Ok(TurningPointEstimate {
        lambda_star,
        a_star,
        window_center: a_center,
        window_halfwidth: a_halfwidth,
        samples,
    })
}

/// Coarse scan that brackets the first fold: traces A = 0.1, 0.2, ... up to
/// `a_scan_max`, takes the discrete argmax of lambda, and proposes a +/- 0.1
/// window around it.
pub fn auto_window(
    problem: &BratuProblem,
    a_scan_max: f64,
    config: &NewtonConfig,
) -> Result<(f64, f64)> {
    let branch = trace_branch(problem, 0.1, 0.1, a_scan_max, config)?;
    let best = branch
        .converged_points()
        .max_by(|p, q| p.lambda.partial_cmp(&q.lambda).unwrap())
        .ok_or_else(|| Error::InvalidParameter("no converged point in the coarse scan".into()))?;
    let last_converged = branch
        .converged_points()
        .last()
        .expect("nonempty by the check above");
    if best.a == last_converged.a {
        // Monotone so far: the fold (if any) lies beyond the scan.
        return Err(Error::MaxAtWindowEdge { a: best.a });
    }
    Ok((best.a, 0.1))
}

/// Locates the first fold with an automatically selected window.
pub fn first_turning_point(
    problem: &BratuProblem,
    a_scan_max: f64,
    samples: usize,
    config: &NewtonConfig,
) -> Result<TurningPointEstimate> {
    let (center, halfwidth) = auto_window(problem, a_scan_max, config)?;
    locate_turning_point(problem, center, halfwidth, samples, config)
}
