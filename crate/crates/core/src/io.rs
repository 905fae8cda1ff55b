//! Serialization of run outputs: branch and stability CSV, turning-point
//! JSON, comparison JSON, field and state files.
//!
//! Parameter values are printed with 9 decimal places; field values carry 17
//! significant digits so a written field reproduces the solution bit-for-bit
//! within printing precision. All writers are deterministic.

use std::io::Write;

use serde::Serialize;

use crate::ball::BallSystem;
use crate::continuation::{Branch, TurningPointEstimate};
use crate::cube::{AssembledSystem, Formulation, FullField};
use crate::error::Result;
use crate::problem::BratuProblem;
use crate::stability::StabilityResult;

pub fn format_lambda(lambda: f64) -> String {
    format!("{lambda:.9}")
}

/// Rounds to 9 decimal places, the precision all parameter values are
/// reported at.
pub fn round9(value: f64) -> f64 {
    (value * 1e9).round() / 1e9
}

/// `A,lambda,iterations,converged,reset_used,max_u` with one row per point.
pub fn write_branch_csv(branch: &Branch, mut out: impl Write) -> Result<()> {
    writeln!(out, "A,lambda,iterations,converged,reset_used,max_u")?;
    for p in &branch.points {
        writeln!(
            out,
            "{:.6},{},{},{},{},{}",
            p.a,
            format_lambda(p.lambda),
            p.iterations,
            p.converged,
            p.reset_used,
            format_lambda(p.max_u),
        )?;
    }
    Ok(())
}

pub fn branch_csv_string(branch: &Branch) -> String {
    let mut buf = Vec::new();
    write_branch_csv(branch, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// `A,lambda,sigma_max,kind` rows.
pub fn write_stability_csv(result: &StabilityResult, mut out: impl Write) -> Result<()> {
    writeln!(out, "A,lambda,sigma_max,kind")?;
    for p in &result.points {
        writeln!(
            out,
            "{:.6},{},{},{}",
            p.a,
            format_lambda(p.lambda),
            format_lambda(p.sigma_max),
            result.kind,
        )?;
    }
    Ok(())
}

pub fn stability_csv_string(result: &StabilityResult) -> String {
    let mut buf = Vec::new();
    write_stability_csv(result, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

#[derive(Debug, Clone, Serialize)]
pub struct WindowRecord {
    pub center: f64,
    pub halfwidth: f64,
}

/// JSON summary of a turning-point search.
#[derive(Debug, Clone, Serialize)]
pub struct TurningPointRecord {
    pub dimension: usize,
    pub n: usize,
    pub domain: &'static str,
    pub window: WindowRecord,
    pub samples: usize,
    #[serde(rename = "A_star")]
    pub a_star: f64,
    pub lambda_star: f64,
}

impl TurningPointRecord {
    pub fn new(problem: &BratuProblem, estimate: &TurningPointEstimate) -> Self {
        Self {
            dimension: problem.dimension(),
            n: problem.subdivisions(),
            domain: match problem {
                BratuProblem::Cube { .. } => "cube",
                BratuProblem::CubeFull { .. } => "cube-full",
                BratuProblem::Ball { .. } => "ball",
            },
            window: WindowRecord {
                center: estimate.window_center,
                halfwidth: estimate.window_halfwidth,
            },
            samples: estimate.samples,
            a_star: round9(estimate.a_star),
            lambda_star: round9(estimate.lambda_star),
        }
    }
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map_err(|e| crate::error::Error::InvalidParameter(format!("serialization failed: {e}")))
}

/// Text field file: `d n` header, then one node value per line in row-major
/// coordinate order.
pub fn write_field(field: &FullField, mut out: impl Write) -> Result<()> {
    writeln!(out, "{} {}", field.d, field.n)?;
    for v in &field.values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

/// Text state file for a converged cube solve: header lines, then the
/// reduced (or full-grid) values.
pub fn write_cube_state(
    system: &AssembledSystem,
    lambda: f64,
    values: &[f64],
    mut out: impl Write,
) -> Result<()> {
    writeln!(out, "domain cube")?;
    writeln!(out, "reduced {}", system.is_reduced())?;
    writeln!(out, "d {}", system.grid().dimension())?;
    writeln!(out, "n {}", system.grid().subdivisions())?;
    write_formulation(system.formulation(), &mut out)?;
    writeln!(out, "lambda {}", format_lambda(lambda))?;
    writeln!(out, "m {}", values.len())?;
    for v in values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

/// Text state file for a converged ball solve: radial values u_1..u_{n-1}.
pub fn write_ball_state(
    system: &BallSystem,
    lambda: f64,
    values: &[f64],
    mut out: impl Write,
) -> Result<()> {
    writeln!(out, "domain ball")?;
    writeln!(out, "d {}", system.dimension())?;
    writeln!(out, "n {}", system.subdivisions())?;
    write_formulation(system.formulation(), &mut out)?;
    writeln!(out, "lambda {}", format_lambda(lambda))?;
    writeln!(out, "m {}", values.len())?;
    for v in values {
        writeln!(out, "{v:.16e}")?;
    }
    Ok(())
}

fn write_formulation(f: Formulation, out: &mut impl Write) -> Result<()> {
    match f {
        Formulation::FixedLambda(l) => writeln!(out, "formulation fixed-lambda {l:.16e}")?,
        Formulation::FixedAmplitude(a) => writeln!(out, "formulation fixed-amplitude {a:.16e}")?,
    }
    Ok(())
}
