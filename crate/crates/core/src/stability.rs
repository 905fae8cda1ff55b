//! Linear stability along a branch: the largest real part of the spectrum of
//! the fixed-parameter Jacobian, evaluated for both the reduced and the
//! full-grid discretizations.
//!
//! The full-grid Jacobian is symmetric. The reduced Jacobian is not, but it
//! is diagonally similar to a symmetric matrix: counting orbits gives
//! `s_p * w_pq = s_q * w_qp` for the stencil weights, so scaling by the
//! square roots of the orbit sizes turns each off-diagonal pair into
//! `sqrt(w_pq * w_qp)`. Both paths therefore use symmetric eigensolvers:
//! dense up to a size threshold, Lanczos with full reorthogonalization above
//! it.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::cube::{assemble_fdm, assemble_sfdm, AssembledSystem, Formulation};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::newton::{newton_solve, NewtonConfig};
use crate::problem::BratuProblem;
use crate::sparse::CsrMatrix;
use crate::symmetry::SymmetricIndexMap;
use crate::system::NonlinearSystem;
use crate::Branch;

/// Above this size the dense eigensolver is replaced by an iterative method.
pub const DENSE_EIGEN_LIMIT: usize = 5000;

/// Residual tolerance of the iterative eigensolvers.
pub const ITERATIVE_EIGEN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SystemKind {
    Fdm,
    Sfdm,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemKind::Fdm => write!(f, "FDM"),
            SystemKind::Sfdm => write!(f, "SFDM"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityPoint {
    pub a: f64,
    pub lambda: f64,
    pub sigma_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityResult {
    pub kind: SystemKind,
    pub points: Vec<StabilityPoint>,
}

/// Largest real part over the spectrum of a square sparse matrix.
///
/// Dense path below [`DENSE_EIGEN_LIMIT`]; Lanczos for large symmetric
/// matrices; restarted Arnoldi otherwise.
pub fn largest_real_eigenvalue(a: &CsrMatrix) -> Result<f64> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidParameter(format!(
            "matrix must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !a.all_finite() {
        return Err(Error::NonFinite("eigenvalue input matrix".into()));
    }
    if a.nrows() == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if a.nrows() <= DENSE_EIGEN_LIMIT {
        let dense = a.to_dense();
        if a.is_symmetric() {
            let eig = dense.symmetric_eigen();
            Ok(eig
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max))
        } else {
            let eig = dense.complex_eigenvalues();
            Ok(eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
        }
    } else if a.is_symmetric() {
        lanczos_max(a, ITERATIVE_EIGEN_TOLERANCE, 600)
    } else {
        arnoldi_rightmost(a, ITERATIVE_EIGEN_TOLERANCE, 90, 40)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Algebraically largest eigenvalue of a symmetric matrix by Lanczos with
/// full reorthogonalization. The residual bound for symmetric matrices makes
/// the returned value accurate to roughly the achieved residual.
fn lanczos_max(a: &CsrMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.nrows();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    // Deterministic start: the all-ones direction has a large overlap with
    // the leading mode of these stencil operators.
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best_residual = f64::INFINITY;

    for it in 0..max_iter {
        basis.push(v.clone());
        a.matvec(&v, &mut w);
        let alpha = dot(&w, &v);
        alphas.push(alpha);
        // w -= alpha v + beta v_prev, then full reorthogonalization.
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= alpha * vi;
        }
        if let Some(beta) = betas.last() {
            let prev = &basis[basis.len() - 2];
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= beta * pi;
            }
        }
        for b in &basis {
            let c = dot(&w, b);
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= c * bi;
            }
        }
        let beta = norm(&w);

        let k = alphas.len();
        let check = beta <= f64::EPSILON || k == max_iter || it % 5 == 4;
        if check {
            let mut t = DMatrix::zeros(k, k);
            for i in 0..k {
                t[(i, i)] = alphas[i];
                if i + 1 < k {
                    t[(i, i + 1)] = betas[i];
                    t[(i + 1, i)] = betas[i];
                }
            }
            let eig = t.symmetric_eigen();
            let (mut arg, mut theta) = (0, f64::NEG_INFINITY);
            for (i, &ev) in eig.eigenvalues.iter().enumerate() {
                if ev > theta {
                    theta = ev;
                    arg = i;
                }
            }
            let residual = beta * eig.eigenvectors[(k - 1, arg)].abs();
            best_residual = best_residual.min(residual);
            if residual <= tol || beta <= f64::EPSILON {
                return Ok(theta);
            }
        }
        if beta <= f64::EPSILON {
            break;
        }
        betas.push(beta);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / beta;
        }
    }
    Err(Error::EigenNoConvergence {
        residual: best_residual,
        iterations: max_iter,
    })
}

/// Rightmost eigenvalue (largest real part) of a general matrix by
/// explicitly restarted Arnoldi. Used only above the dense threshold when
/// the matrix is not symmetric.
fn arnoldi_rightmost(
    a: &CsrMatrix,
    tol: f64,
    krylov_dim: usize,
    max_restarts: usize,
) -> Result<f64> {
    use nalgebra::Complex;
    let n = a.nrows();
    let mut start: Vec<f64> = (0..n).map(|i| 1.0 + 0.3 * ((i % 7) as f64) / 7.0).collect();
    let s = norm(&start);
    start.iter_mut().for_each(|x| *x /= s);

    let mut best_residual = f64::INFINITY;
    for _ in 0..max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let k = krylov_dim.min(n);
        let mut h = DMatrix::<f64>::zeros(k + 1, k);
        let mut w = vec![0.0; n];
        let mut kdim = k;
        for j in 0..k {
            a.matvec(&basis[j], &mut w);
            for (i, b) in basis.iter().enumerate() {
                let c = dot(&w, b);
                h[(i, j)] = c;
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            // Second orthogonalization pass for stability.
            for (i, b) in basis.iter().enumerate() {
                let c = dot(&w, b);
                h[(i, j)] += c;
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
            let beta = norm(&w);
            h[(j + 1, j)] = beta;
            if beta <= f64::EPSILON {
                kdim = j + 1;
                break;
            }
            basis.push(w.iter().map(|x| x / beta).collect());
        }

        let hk = h.view((0, 0), (kdim, kdim)).into_owned();
        let beta_last = h[(kdim, kdim - 1)];
        let eigenvalues = hk.clone().complex_eigenvalues();
        let theta = eigenvalues
            .iter()
            .cloned()
            .max_by(|x, y| x.re.partial_cmp(&y.re).unwrap())
            .expect("nonempty spectrum");

        // Eigenvector of H for theta via one shifted complex solve.
        let shifted = hk.map(|x| Complex::new(x, 0.0))
            - DMatrix::from_diagonal_element(kdim, kdim, theta + Complex::new(1e-12, 1e-12));
        let rhs = nalgebra::DVector::from_element(kdim, Complex::new(1.0, 0.0));
        let s = shifted
            .lu()
            .solve(&rhs)
            .unwrap_or_else(|| nalgebra::DVector::from_element(kdim, Complex::new(1.0, 0.0)));
        let s = &s / Complex::new(s.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt(), 0.0);
        let residual = beta_last * s[kdim - 1].norm();
        best_residual = best_residual.min(residual);
        if residual <= tol {
            return Ok(theta.re);
        }

        // Restart in the direction of the real part of the Ritz vector.
        let mut next = vec![0.0; n];
        for (j, b) in basis.iter().take(kdim).enumerate() {
            let c = s[j].re;
            for (ni, bi) in next.iter_mut().zip(b) {
                *ni += c * bi;
            }
        }
        let nn = norm(&next);
        if nn <= f64::EPSILON {
            break;
        }
        next.iter_mut().for_each(|x| *x /= nn);
        start = next;
    }
    Err(Error::EigenNoConvergence {
        residual: best_residual,
        iterations: max_restarts,
    })
}

/// Similarity transform that symmetrizes a reduced-system Jacobian.
///
/// Verifies the orbit-weight balance `s_p * w_pq = s_q * w_qp` entry by
/// entry, then replaces each off-diagonal pair by `sqrt(w_pq * w_qp)`, which
/// is exactly the diagonally scaled matrix and exactly symmetric.
pub fn symmetrize_reduced(jac: &CsrMatrix, map: &SymmetricIndexMap) -> Result<CsrMatrix> {
    let m = jac.nrows();
    if m != map.len() || m != jac.ncols() {
        return Err(Error::InvalidParameter(format!(
            "jacobian {}x{} does not match the reduced index map ({})",
            jac.nrows(),
            jac.ncols(),
            map.len()
        )));
    }
    let mut sizes = Vec::with_capacity(m);
    for p in 1..=m {
        sizes.push(map.orbit_size(&map.unrank(p)?)? as f64);
    }
    let mut triplets = Vec::with_capacity(jac.nnz());
    for r in 0..m {
        for (c, v) in jac.row(r) {
            if r == c {
                triplets.push((r, c, v));
                continue;
            }
            let back = jac.get(c, r);
            if back == 0.0 || (sizes[r] * v - sizes[c] * back).abs() > 1e-9 * v.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "orbit balance violated at ({r},{c}): {} vs {}",
                    sizes[r] * v,
                    sizes[c] * back
                )));
            }
            if r < c {
                let s = v.signum() * (v * back).sqrt();
                triplets.push((r, c, s));
                triplets.push((c, r, s));
            }
        }
    }
    CsrMatrix::from_triplets(m, m, &triplets)
}

fn cube_system(kind: SystemKind, grid: GridSpec, a: f64) -> Result<AssembledSystem> {
    match kind {
        SystemKind::Sfdm => assemble_sfdm(grid, Formulation::FixedAmplitude(a)),
        SystemKind::Fdm => assemble_fdm(grid, Formulation::FixedAmplitude(a)),
    }
}

/// Largest real eigenvalue of the fixed-parameter stability Jacobian at one
/// amplitude, re-solving with the requested discretization.
pub fn stability_at_amplitude(
    kind: SystemKind,
    grid: GridSpec,
    a: f64,
    config: &NewtonConfig,
) -> Result<StabilityPoint> {
    let system = cube_system(kind, grid, a)?;
    let state = newton_solve(&system, &system.zero_state(), config)?;
    if !state.converged {
        return Err(Error::UnconvergedSample {
            a,
            reason: state
                .failure
                .map_or_else(|| "unknown".into(), |f| f.to_string()),
        });
    }
    let lambda = system.lambda_value(&state.unknowns);
    let u = system.grid_values(&state.unknowns);
    let jac = system.stability_jacobian(lambda, &u)?;
    let sigma_max = match kind {
        SystemKind::Fdm => largest_real_eigenvalue(&jac)?,
        SystemKind::Sfdm => {
            let sym = symmetrize_reduced(&jac, system.index_map())?;
            largest_real_eigenvalue(&sym)?
        }
    };
    Ok(StabilityPoint {
        a,
        lambda,
        sigma_max,
    })
}

/// Evaluates the stability eigenvalue at every converged point of a branch,
/// using the requested discretization of the same cube problem.
pub fn branch_stability(
    branch: &Branch,
    kind: SystemKind,
    config: &NewtonConfig,
) -> Result<StabilityResult> {
    let (d, n) = match branch.problem {
        BratuProblem::Cube { d, n } | BratuProblem::CubeFull { d, n } => (d, n),
        BratuProblem::Ball { .. } => {
            return Err(Error::InvalidParameter(
                "stability comparison is defined for cube-domain branches".into(),
            ))
        }
    };
    let grid = GridSpec::new(d, n)?;
    let mut points = Vec::new();
    for p in branch.converged_points() {
        points.push(stability_at_amplitude(kind, grid, p.a, config)?);
    }
    Ok(StabilityResult { kind, points })
}
