//! Traces a coarse bifurcation branch for the 3D problem at n = 20, then
//! locates the first fold with the dense-sampling spline procedure.
//!
//! Run with: cargo run --release -p bratu-core --example first_fold

use bratu_core::io::branch_csv_string;
use bratu_core::*;

fn main() -> Result<()> {
    let problem = BratuProblem::Cube { d: 3, n: 20 };
    let config = NewtonConfig::default();

    let branch = trace_branch(&problem, 0.2, 0.2, 4.0, &config)?;
    print!("{}", branch_csv_string(&branch));

    let fold = first_turning_point(&problem, 5.0, 101, &config)?;
    eprintln!(
        "first fold: lambda* = {:.9} at A* = {:.6}",
        fold.lambda_star, fold.a_star
    );
    Ok(())
}
