//! A continuation problem: which domain, which discretization, which size.
//! Instantiating it with a formulation yields a concrete nonlinear system.

use serde::Serialize;

use crate::ball::{assemble_ball, BallSystem};
use crate::cube::{assemble_fdm, assemble_sfdm, AssembledSystem, Formulation};
use crate::error::Result;
use crate::grid::GridSpec;
use crate::sparse::CsrMatrix;
use crate::system::NonlinearSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum BratuProblem {
    /// Symmetry-reduced cube discretization (the default).
    Cube { d: usize, n: usize },
    /// Full-grid cube discretization (reference/oracle path).
    CubeFull { d: usize, n: usize },
    /// Radial discretization on the unit ball.
    Ball { d: usize, n: usize },
}

impl BratuProblem {
    pub fn dimension(&self) -> usize {
        match *self {
            BratuProblem::Cube { d, .. }
            | BratuProblem::CubeFull { d, .. }
            | BratuProblem::Ball { d, .. } => d,
        }
    }

    pub fn subdivisions(&self) -> usize {
        match *self {
            BratuProblem::Cube { n, .. }
            | BratuProblem::CubeFull { n, .. }
            | BratuProblem::Ball { n, .. } => n,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            BratuProblem::Cube { d, n } => format!("cube-reduced d={d} n={n}"),
            BratuProblem::CubeFull { d, n } => format!("cube-full d={d} n={n}"),
            BratuProblem::Ball { d, n } => format!("ball d={d} n={n}"),
        }
    }

    pub fn system(&self, formulation: Formulation) -> Result<SystemInstance> {
        Ok(match *self {
            BratuProblem::Cube { d, n } => {
                SystemInstance::Cube(assemble_sfdm(GridSpec::new(d, n)?, formulation)?)
            }
            BratuProblem::CubeFull { d, n } => {
                SystemInstance::Cube(assemble_fdm(GridSpec::new(d, n)?, formulation)?)
            }
            BratuProblem::Ball { d, n } => SystemInstance::Ball(assemble_ball(d, n, formulation)?),
        })
    }
}

/// A concrete assembled system for either domain.
#[derive(Debug, Clone)]
pub enum SystemInstance {
    Cube(AssembledSystem),
    Ball(BallSystem),
}

impl SystemInstance {
    pub fn as_cube(&self) -> Option<&AssembledSystem> {
        match self {
            SystemInstance::Cube(sys) => Some(sys),
            SystemInstance::Ball(_) => None,
        }
    }

    pub fn as_ball(&self) -> Option<&BallSystem> {
        match self {
            SystemInstance::Ball(sys) => Some(sys),
            SystemInstance::Cube(_) => None,
        }
    }
}

impl NonlinearSystem for SystemInstance {
    fn unknown_count(&self) -> usize {
        match self {
            SystemInstance::Cube(s) => s.unknown_count(),
            SystemInstance::Ball(s) => s.unknown_count(),
        }
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            SystemInstance::Cube(s) => s.residual(x),
            SystemInstance::Ball(s) => s.residual(x),
        }
    }

    fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix> {
        match self {
            SystemInstance::Cube(s) => s.jacobian(x),
            SystemInstance::Ball(s) => s.jacobian(x),
        }
    }

    fn field_values(&self, x: &[f64]) -> Vec<f64> {
        match self {
            SystemInstance::Cube(s) => s.field_values(x),
            SystemInstance::Ball(s) => s.field_values(x),
        }
    }

    fn lambda_value(&self, x: &[f64]) -> f64 {
        match self {
            SystemInstance::Cube(s) => s.lambda_value(x),
            SystemInstance::Ball(s) => s.lambda_value(x),
        }
    }
}
