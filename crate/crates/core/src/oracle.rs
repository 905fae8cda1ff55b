//! Brute-force certification of the reduced assembly: solve the same problem
//! on the full grid, expand the reduced solution over the symmetry orbits,
//! and measure the worst-case disagreement.

use serde::Serialize;

use crate::cube::{assemble_fdm, assemble_sfdm, reconstruct_full, Formulation};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::newton::{newton_solve, NewtonConfig};
use crate::system::NonlinearSystem;

/// Full-grid sizes beyond this are refused; the oracle certifies, it does
/// not compete.
pub const ORACLE_CAPACITY: u64 = 100_000;

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub d: usize,
    pub n: usize,
    pub sup_norm_difference: f64,
    /// Grid coordinates where the largest difference occurs.
    pub max_difference_at: Vec<usize>,
    pub fdm_unknowns: u64,
    pub sfdm_unknowns: u64,
    /// Size ratio `(n-1)^d / m`.
    pub ratio: f64,
    pub lambda_full: f64,
    pub lambda_reduced: f64,
}

/// Solves both discretizations from zero initial states and compares the
/// expanded reduced solution against the full-grid one.
pub fn compare_sfdm_fdm(
    d: usize,
    n: usize,
    formulation: Formulation,
    config: &NewtonConfig,
) -> Result<ComparisonReport> {
    let grid = GridSpec::new(d, n)?;
    if grid.full_interior_count() > ORACLE_CAPACITY {
        return Err(Error::Capacity(format!(
            "full grid has {} interior points, above the oracle limit {ORACLE_CAPACITY}",
            grid.full_interior_count()
        )));
    }

    let reduced = assemble_sfdm(grid, formulation)?;
    let full = assemble_fdm(grid, formulation)?;

    let param = match formulation {
        Formulation::FixedLambda(l) => l,
        Formulation::FixedAmplitude(a) => a,
    };
    let solve = |sys: &dyn NonlinearSystem| -> Result<Vec<f64>> {
        let state = newton_solve(sys, &sys.zero_state(), config)?;
        if !state.converged {
            return Err(Error::UnconvergedSample {
                a: param,
                reason: state
                    .failure
                    .map_or_else(|| "unknown".into(), |f| f.to_string()),
            });
        }
        Ok(state.unknowns)
    };

    let x_reduced = solve(&reduced)?;
    let x_full = solve(&full)?;

    let field = reconstruct_full(&reduced.grid_values(&x_reduced), reduced.index_map())?;
    let u_full = full.grid_values(&x_full);

    let mut sup = 0.0f64;
    let mut at = vec![1usize; d];
    let mut idx = 0usize;
    crate::cube::for_each_interior(d, n, |coords| {
        let diff = (field.get(coords) - u_full[idx]).abs();
        if diff > sup {
            sup = diff;
            at.copy_from_slice(coords);
        }
        idx += 1;
    });

    let fdm_unknowns = grid.full_interior_count();
    let sfdm_unknowns = reduced.unknown_count() as u64;
    Ok(ComparisonReport {
        d,
        n,
        sup_norm_difference: sup,
        max_difference_at: at,
        fdm_unknowns,
        sfdm_unknowns,
        ratio: fdm_unknowns as f64 / sfdm_unknowns as f64,
        lambda_full: full.lambda_value(&x_full),
        lambda_reduced: reduced.lambda_value(&x_reduced),
    })
}
