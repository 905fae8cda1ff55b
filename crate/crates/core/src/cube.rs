//! Assembly of the nonlinear systems on the cube domain: the symmetry-reduced
//! system over the fundamental simplex, and the standard full-grid system used
//! as a brute-force reference.
//!
//! Every equation has the form
//!
//! ```text
//! -2d * u_p + sum_neighbors u_q + h^2 * lambda * exp(u_p) = 0
//! ```
//!
//! with `u_0 = 0` on the boundary. In the reduced system a neighbor index is
//! obtained by reflecting the stepped coordinate into the fundamental half,
//! sorting, and ranking; neighbors that collide are merged into integer
//! multiplicities.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::sparse::CsrMatrix;
use crate::symmetry::SymmetricIndexMap;
use crate::system::NonlinearSystem;

/// Largest full-grid system `assemble_fdm` will build. The full grid exists
/// to certify the reduced assembly, not to compete with it.
pub const FDM_CAPACITY: u64 = 250_000;

/// Largest reconstructed field, in grid nodes.
pub const FIELD_CAPACITY: u64 = 1 << 24;

/// Which problem the system encodes: a fixed parameter value, or a fixed
/// solution amplitude with the parameter promoted to an unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation {
    FixedLambda(f64),
    FixedAmplitude(f64),
}

impl Formulation {
    fn validate(&self) -> Result<()> {
        match *self {
            Formulation::FixedLambda(l) if !l.is_finite() => Err(Error::InvalidParameter(format!(
                "lambda must be finite, got {l}"
            ))),
            Formulation::FixedAmplitude(a) if !(a.is_finite() && a >= 0.0) => Err(
                Error::InvalidParameter(format!("amplitude must be finite and >= 0, got {a}")),
            ),
            _ => Ok(()),
        }
    }
}

/// One assembled equation: the center unknown, the constant diagonal
/// coefficient, and the neighbor indices with multiplicities. Index 0 is the
/// boundary and contributes nothing to the matrix; it is kept here so the
/// multiplicities always sum to `2d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StencilRow {
    /// Packed index of the center unknown (1-based).
    pub center: usize,
    /// Constant diagonal coefficient, always `-2d`.
    pub diagonal: i32,
    /// (packed index, multiplicity) pairs, sorted by index; index 0 allowed.
    pub neighbors: Vec<(usize, u32)>,
    /// Whether the row carries the `h^2 * lambda * exp(u_center)` term.
    pub exponential: bool,
}

impl StencilRow {
    pub fn multiplicity_sum(&self) -> u32 {
        self.neighbors.iter().map(|&(_, w)| w).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Reduction {
    /// Unknowns indexed by nondecreasing tuples over the fundamental simplex.
    Symmetric,
    /// Unknowns indexed by all interior grid points.
    Full,
}

/// An assembled cube-domain system in either formulation.
///
/// The linear coefficient matrix is built once and never changes across
/// Newton iterations; only the exponential diagonal (and the parameter
/// column in the fixed-amplitude formulation) is re-evaluated.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    grid: GridSpec,
    map: SymmetricIndexMap,
    reduction: Reduction,
    rows: Vec<StencilRow>,
    formulation: Formulation,
    /// Constant stencil coefficients, m x m, boundary entries dropped.
    linear: CsrMatrix,
    /// Unknown pinned to the amplitude in the fixed-amplitude formulation
    /// (0-based), `None` under fixed-lambda.
    pinned: Option<usize>,
}

fn lex_index(coords: &[usize], n: usize) -> usize {
    coords.iter().fold(0, |acc, &c| acc * (n - 1) + (c - 1))
}

/// Iterates over interior coordinate tuples in row-major order (last
/// coordinate fastest), matching `lex_index`.
pub(crate) fn for_each_interior(d: usize, n: usize, mut f: impl FnMut(&[usize])) {
    let mut coords = vec![1usize; d];
    loop {
        f(&coords);
        let mut j = d;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            if coords[j] < n - 1 {
                coords[j] += 1;
                for c in coords[j + 1..].iter_mut() {
                    *c = 1;
                }
                break;
            }
        }
    }
}

fn merge_neighbors(mut raw: Vec<usize>) -> Vec<(usize, u32)> {
    raw.sort_unstable();
    let mut merged: Vec<(usize, u32)> = Vec::with_capacity(raw.len());
    for q in raw {
        match merged.last_mut() {
            Some((idx, w)) if *idx == q => *w += 1,
            _ => merged.push((q, 1)),
        }
    }
    merged
}

fn linear_matrix(rows: &[StencilRow], m: usize, d: usize) -> Result<CsrMatrix> {
    let mut triplets = Vec::with_capacity(rows.len() * (2 * d + 1));
    for row in rows {
        let r = row.center - 1;
        triplets.push((r, r, f64::from(row.diagonal)));
        for &(q, w) in &row.neighbors {
            if q != 0 {
                triplets.push((r, q - 1, f64::from(w)));
            }
        }
    }
    CsrMatrix::from_triplets(m, m, &triplets)
}

/// Builds the symmetry-reduced system.
pub fn assemble_sfdm(grid: GridSpec, formulation: Formulation) -> Result<AssembledSystem> {
    formulation.validate()?;
    let map = SymmetricIndexMap::new(grid);
    let d = grid.dimension();
    let n = grid.subdivisions();
    let m = map.len();

    let mut rows = Vec::with_capacity(m);
    let mut scratch = vec![0usize; d];
    for (r, tuple) in map.tuples().enumerate() {
        let mut raw = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [-1i64, 1] {
                let stepped = (tuple[axis] as i64 + step) as usize;
                let folded = stepped.min(n - stepped);
                if folded == 0 {
                    raw.push(0);
                    continue;
                }
                scratch.copy_from_slice(&tuple);
                scratch[axis] = folded;
                scratch.sort_unstable();
                raw.push(map.rank(&scratch)?);
            }
        }
        rows.push(StencilRow {
            center: r + 1,
            diagonal: -(2 * d as i32),
            neighbors: merge_neighbors(raw),
            exponential: true,
        });
    }

    let linear = linear_matrix(&rows, m, d)?;
    let pinned = match formulation {
        Formulation::FixedLambda(_) => None,
        // rank(k, ..., k) = m: the reduced center, last in lexicographic order.
        Formulation::FixedAmplitude(_) => Some(m - 1),
    };
    Ok(AssembledSystem {
        grid,
        map,
        reduction: Reduction::Symmetric,
        rows,
        formulation,
        linear,
        pinned,
    })
}

/// Builds the standard full-grid system over all interior points.
pub fn assemble_fdm(grid: GridSpec, formulation: Formulation) -> Result<AssembledSystem> {
    formulation.validate()?;
    let d = grid.dimension();
    let n = grid.subdivisions();
    let size = grid.full_interior_count();
    if size > FDM_CAPACITY {
        return Err(Error::Capacity(format!(
            "full grid has {size} interior points, above the {FDM_CAPACITY} reference limit"
        )));
    }
    let m = size as usize;

    let mut rows = Vec::with_capacity(m);
    let mut center = 0usize;
    for_each_interior(d, n, |coords| {
        let mut raw = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [-1i64, 1] {
                let stepped = (coords[axis] as i64 + step) as usize;
                if stepped == 0 || stepped == n {
                    raw.push(0);
                } else {
                    let mut neighbor = coords.to_vec();
                    neighbor[axis] = stepped;
                    raw.push(lex_index(&neighbor, n) + 1);
                }
            }
        }
        center += 1;
        rows.push(StencilRow {
            center,
            diagonal: -(2 * d as i32),
            neighbors: merge_neighbors(raw),
            exponential: true,
        });
    });

    let linear = linear_matrix(&rows, m, d)?;
    let pinned = match formulation {
        Formulation::FixedLambda(_) => None,
        // Center of the domain; for odd n the nearest-to-center node that
        // represents the reduced pin (k, ..., k) with k = (n-1)/2.
        Formulation::FixedAmplitude(_) => {
            let c = vec![grid.half_extent(); d];
            Some(lex_index(&c, n))
        }
    };
    Ok(AssembledSystem {
        grid,
        map: SymmetricIndexMap::new(grid),
        reduction: Reduction::Full,
        rows,
        formulation,
        linear,
        pinned,
    })
}

impl AssembledSystem {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn index_map(&self) -> &SymmetricIndexMap {
        &self.map
    }

    pub fn rows(&self) -> &[StencilRow] {
        &self.rows
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    /// Constant coefficient matrix (shared by every Newton iteration).
    pub fn linear_part(&self) -> &CsrMatrix {
        &self.linear
    }

    /// Number of grid unknowns `m` (the pinned one included).
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduction == Reduction::Symmetric
    }

    pub fn pinned_index(&self) -> Option<usize> {
        self.pinned
    }

    fn h_squared(&self) -> f64 {
        let h = self.grid.spacing();
        h * h
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.unknown_count() {
            return Err(Error::InvalidParameter(format!(
                "state length {} does not match system size {}",
                x.len(),
                self.unknown_count()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state vector".into()));
        }
        Ok(())
    }

    /// Expands an unknown vector into the length-m vector of grid values.
    pub fn grid_values(&self, x: &[f64]) -> Vec<f64> {
        match (self.formulation, self.pinned) {
            (Formulation::FixedLambda(_), _) => x.to_vec(),
            (Formulation::FixedAmplitude(a), Some(pin)) => {
                let m = self.size();
                let mut u = Vec::with_capacity(m);
                u.extend_from_slice(&x[1..=pin]);
                u.push(a);
                u.extend_from_slice(&x[pin + 1..]);
                debug_assert_eq!(u.len(), m);
                u
            }
            _ => unreachable!("fixed-amplitude systems always pin an unknown"),
        }
    }

    fn lambda_of(&self, x: &[f64]) -> f64 {
        match self.formulation {
            Formulation::FixedLambda(l) => l,
            Formulation::FixedAmplitude(_) => x[0],
        }
    }

    /// Fixed-lambda Jacobian `L + diag(h^2 lambda e^u)` at an arbitrary
    /// state, rescaled by `1/h^2` so its spectrum matches the differential
    /// operator's; used for linear stability.
    pub fn stability_jacobian(&self, lambda: f64, grid_values: &[f64]) -> Result<CsrMatrix> {
        if grid_values.len() != self.size() {
            return Err(Error::InvalidParameter(format!(
                "grid value length {} does not match system size {}",
                grid_values.len(),
                self.size()
            )));
        }
        let h2 = self.h_squared();
        // The diagonal entry is always structurally present (-2d).
        let mut out = Vec::with_capacity(self.linear.nnz());
        for (r, ur) in grid_values.iter().enumerate() {
            let dr = h2 * lambda * ur.exp();
            for (c, v) in self.linear.row(r) {
                out.push((r, c, if c == r { v + dr } else { v }));
            }
        }
        let jac = CsrMatrix::from_triplets(self.size(), self.size(), &out)?;
        Ok(jac.scaled(1.0 / h2))
    }
}

impl NonlinearSystem for AssembledSystem {
    fn unknown_count(&self) -> usize {
        self.size()
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        let u = self.grid_values(x);
        let lambda = self.lambda_of(x);
        let h2 = self.h_squared();
        let mut r = vec![0.0; self.size()];
        self.linear.matvec(&u, &mut r);
        for (ri, &ui) in r.iter_mut().zip(&u) {
            *ri += h2 * lambda * ui.exp();
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("residual".into()));
        }
        Ok(r)
    }

    fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix> {
        self.check_state(x)?;
        let u = self.grid_values(x);
        let lambda = self.lambda_of(x);
        let h2 = self.h_squared();
        let m = self.size();
        match (self.formulation, self.pinned) {
            (Formulation::FixedLambda(_), _) => {
                let mut triplets = Vec::with_capacity(self.linear.nnz() + m);
                for (r, ur) in u.iter().enumerate() {
                    for (c, v) in self.linear.row(r) {
                        triplets.push((r, c, v));
                    }
                    triplets.push((r, r, h2 * lambda * ur.exp()));
                }
                CsrMatrix::from_triplets(m, m, &triplets)
            }
            (Formulation::FixedAmplitude(_), Some(pin)) => {
                // Unknown layout: (lambda, u_0, ..., u_{pin-1}, u_{pin+1}, ...).
                let col_of = |q: usize| if q < pin { q + 1 } else { q };
                let mut triplets = Vec::with_capacity(self.linear.nnz() + 2 * m);
                for (r, ur) in u.iter().enumerate() {
                    triplets.push((r, 0, h2 * ur.exp()));
                    for (c, v) in self.linear.row(r) {
                        if c != pin {
                            triplets.push((r, col_of(c), v));
                        }
                    }
                    if r != pin {
                        triplets.push((r, col_of(r), h2 * lambda * ur.exp()));
                    }
                }
                CsrMatrix::from_triplets(m, m, &triplets)
            }
            _ => unreachable!(),
        }
    }

    fn field_values(&self, x: &[f64]) -> Vec<f64> {
        self.grid_values(x)
    }

    fn lambda_value(&self, x: &[f64]) -> f64 {
        self.lambda_of(x)
    }
}

/// Solution values over every node of the full grid, boundary included,
/// stored row-major (last coordinate fastest).
#[derive(Debug, Clone)]
pub struct FullField {
    pub d: usize,
    pub n: usize,
    pub values: Vec<f64>,
}

impl FullField {
    pub fn node_count(d: usize, n: usize) -> u64 {
        ((n + 1) as u64).pow(d as u32)
    }

    pub fn get(&self, coords: &[usize]) -> f64 {
        let idx = coords.iter().fold(0, |acc, &c| acc * (self.n + 1) + c);
        self.values[idx]
    }
}

/// Expands reduced solution values onto the full grid through the canonical
/// index map. Boundary nodes are zero.
pub fn reconstruct_full(reduced_values: &[f64], map: &SymmetricIndexMap) -> Result<FullField> {
    let d = map.grid().dimension();
    let n = map.grid().subdivisions();
    if reduced_values.len() != map.len() {
        return Err(Error::InvalidParameter(format!(
            "expected {} reduced values, got {}",
            map.len(),
            reduced_values.len()
        )));
    }
    let nodes = FullField::node_count(d, n);
    if nodes > FIELD_CAPACITY {
        return Err(Error::Capacity(format!(
            "field of {nodes} nodes exceeds the {FIELD_CAPACITY} limit"
        )));
    }
    let mut values = Vec::with_capacity(nodes as usize);
    let mut coords = vec![0usize; d];
    loop {
        let p = map.canonical_index(&coords)?;
        values.push(if p == 0 { 0.0 } else { reduced_values[p - 1] });
        let mut j = d;
        loop {
            if j == 0 {
                return Ok(FullField { d, n, values });
            }
            j -= 1;
            if coords[j] < n {
                coords[j] += 1;
                for c in coords[j + 1..].iter_mut() {
                    *c = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::variable_count;

    fn grid(d: usize, n: usize) -> GridSpec {
        GridSpec::new(d, n).unwrap()
    }

    /// Rows of the reduced system as dense (diagonal-merged) coefficient
    /// vectors for easy comparison.
    fn dense_rows(sys: &AssembledSystem) -> Vec<Vec<f64>> {
        let m = sys.size();
        (0..m)
            .map(|r| (0..m).map(|c| sys.linear_part().get(r, c)).collect())
            .collect()
    }

    #[test]
    fn replays_selected_reduced_rows_d3_n6() {
        let sys = assemble_sfdm(grid(3, 6), Formulation::FixedLambda(1.0)).unwrap();
        let rows = dense_rows(&sys);
        // -6u1 + 3u2
        assert_eq!(rows[0][0], -6.0);
        assert_eq!(rows[0][1], 3.0);
        assert_eq!(rows[0].iter().map(|v| v.abs()).sum::<f64>(), 9.0);
        // 2u2 - 6u3 + 2u5
        assert_eq!(rows[2][1], 2.0);
        assert_eq!(rows[2][2], -6.0);
        assert_eq!(rows[2][4], 2.0);
        // 6u9 - 6u10
        assert_eq!(rows[9][8], 6.0);
        assert_eq!(rows[9][9], -6.0);
    }

    #[test]
    fn one_dimensional_even_rows() {
        let sys = assemble_sfdm(grid(1, 4), Formulation::FixedLambda(1.0)).unwrap();
        let rows = dense_rows(&sys);
        assert_eq!(rows, vec![vec![-2.0, 1.0], vec![2.0, -2.0]]);
    }

    #[test]
    fn one_dimensional_odd_center_folds_onto_itself() {
        // n = 5: the neighbor above k reflects back to k, so the diagonal
        // absorbs one unit.
        let sys = assemble_sfdm(grid(1, 5), Formulation::FixedLambda(1.0)).unwrap();
        let rows = dense_rows(&sys);
        assert_eq!(rows, vec![vec![-2.0, 1.0], vec![1.0, -1.0]]);
    }

    #[test]
    fn multiplicities_sum_to_2d() {
        for (d, n) in [(1usize, 6usize), (2, 7), (3, 6), (3, 9), (4, 5), (5, 4)] {
            let sys = assemble_sfdm(grid(d, n), Formulation::FixedLambda(0.5)).unwrap();
            for row in sys.rows() {
                assert_eq!(row.multiplicity_sum() as usize, 2 * d, "d={d} n={n}");
                assert!(row.neighbors.len() <= 2 * d);
            }
            let fdm = assemble_fdm(grid(d.min(3), 4), Formulation::FixedLambda(0.5)).unwrap();
            for row in fdm.rows() {
                assert_eq!(row.multiplicity_sum() as usize, 2 * d.min(3));
            }
        }
    }

    #[test]
    fn fdm_sizes_and_guard() {
        let sys = assemble_fdm(grid(3, 20), Formulation::FixedLambda(1.0)).unwrap();
        assert_eq!(sys.size(), 6859);
        assert!(assemble_fdm(grid(3, 80), Formulation::FixedLambda(1.0)).is_err());
    }

    #[test]
    fn trivial_fdm_single_point() {
        let sys = assemble_fdm(grid(1, 2), Formulation::FixedLambda(1.0)).unwrap();
        assert_eq!(sys.size(), 1);
        assert_eq!(sys.linear_part().get(0, 0), -2.0);
    }

    #[test]
    fn residual_values_at_zero_state() {
        let sys = assemble_sfdm(grid(3, 6), Formulation::FixedLambda(0.0)).unwrap();
        let r = sys.residual(&[0.0; 10]).unwrap();
        assert!(r.iter().all(|&v| v == 0.0));

        let sys = assemble_sfdm(grid(3, 6), Formulation::FixedLambda(1.0)).unwrap();
        let r = sys.residual(&[0.0; 10]).unwrap();
        for v in r {
            assert!((v - 1.0 / 36.0).abs() < 1e-16);
        }
    }

    #[test]
    fn residual_rejects_bad_states() {
        let sys = assemble_sfdm(grid(2, 6), Formulation::FixedLambda(1.0)).unwrap();
        assert!(sys.residual(&[0.0; 3]).is_err());
        assert!(sys.residual(&[f64::NAN; 6]).is_err());
    }

    #[test]
    fn jacobian_fixed_lambda_structure() {
        let sys = assemble_sfdm(grid(3, 6), Formulation::FixedLambda(0.0)).unwrap();
        let j = sys.jacobian(&[0.0; 10]).unwrap();
        // lambda = 0: Jacobian equals the constant linear part.
        assert_eq!(j.to_dense(), sys.linear_part().to_dense());

        let sys = assemble_sfdm(grid(3, 6), Formulation::FixedLambda(2.0)).unwrap();
        let j = sys.jacobian(&[0.0; 10]).unwrap();
        assert_eq!(j.get(1, 0), 1.0);
        assert_eq!(j.get(0, 1), 3.0);
        let h2 = 1.0 / 36.0;
        for i in 0..10 {
            assert!((j.get(i, i) - (-6.0 + 2.0 * h2)).abs() < 1e-15);
        }
    }

    #[test]
    fn jacobian_fixed_amplitude_structure() {
        let a = 0.7;
        let sys = assemble_sfdm(grid(3, 6), Formulation::FixedAmplitude(a)).unwrap();
        assert_eq!(sys.pinned_index(), Some(9));
        let lambda = 1.3;
        let mut x = vec![0.25; 10];
        x[0] = lambda;
        let j = sys.jacobian(&x).unwrap();
        let h2 = 1.0 / 36.0;
        // Parameter column (derivatives with respect to lambda).
        for r in 0..9 {
            assert!((j.get(r, 0) - h2 * 0.25f64.exp()).abs() < 1e-15);
        }
        assert!((j.get(9, 0) - h2 * a.exp()).abs() < 1e-15);
        // Pinned unknown's column is gone: last row keeps only the lambda
        // column and its neighbor coefficient 6 at u9.
        assert_eq!(j.get(9, 9), 6.0);
        // Shifted copies of the linear part: J[0][1] = L[0][0] + exp diag.
        assert!((j.get(0, 1) - (-6.0 + h2 * lambda * 0.25f64.exp())).abs() < 1e-15);
        assert_eq!(j.get(1, 1), 1.0);
    }

    #[test]
    fn grid_values_roundtrip_fixed_amplitude() {
        let sys = assemble_sfdm(grid(2, 8), Formulation::FixedAmplitude(2.5)).unwrap();
        let m = sys.size();
        let mut x = vec![0.0; m];
        x[0] = 9.0;
        for (i, v) in x.iter_mut().enumerate().skip(1) {
            *v = i as f64;
        }
        let u = sys.grid_values(&x);
        assert_eq!(u.len(), m);
        assert_eq!(u[m - 1], 2.5);
        assert_eq!(u[0], 1.0);
        assert_eq!(sys.lambda_value(&x), 9.0);
    }

    #[test]
    fn reconstruction_respects_orbits() {
        let g = grid(3, 6);
        let sys = assemble_sfdm(g, Formulation::FixedLambda(1.0)).unwrap();
        let reduced: Vec<f64> = (1..=sys.size()).map(|p| p as f64).collect();
        let field = reconstruct_full(&reduced, sys.index_map()).unwrap();
        assert_eq!(field.values.len(), 343);
        assert_eq!(field.get(&[2, 1, 3]), field.get(&[1, 2, 3]));
        assert_eq!(field.get(&[2, 1, 3]), field.get(&[4, 1, 3]));
        assert_eq!(field.get(&[5, 1, 3]), field.get(&[1, 1, 3]));
        assert_eq!(field.get(&[0, 4, 2]), 0.0);
        assert_eq!(field.get(&[3, 3, 3]), sys.size() as f64);

        // Odd grid: 5 reflects onto 2 when n = 7.
        let g7 = grid(3, 7);
        let sys7 = assemble_sfdm(g7, Formulation::FixedLambda(1.0)).unwrap();
        let reduced7: Vec<f64> = (1..=sys7.size()).map(|p| p as f64).collect();
        let field7 = reconstruct_full(&reduced7, sys7.index_map()).unwrap();
        assert_eq!(field7.get(&[5, 1, 3]), field7.get(&[2, 1, 3]));
    }

    #[test]
    fn capacity_checks() {
        let g = grid(5, 40);
        let map = SymmetricIndexMap::new(g);
        let reduced = vec![0.0; map.len()];
        assert!(reconstruct_full(&reduced, &map).is_err());
    }

    #[test]
    fn row_counts_match_variable_count() {
        for (d, n) in [(2usize, 10usize), (3, 7), (4, 6), (5, 5)] {
            let sys = assemble_sfdm(grid(d, n), Formulation::FixedLambda(1.0)).unwrap();
            assert_eq!(sys.size() as u64, variable_count(d, n).unwrap());
        }
    }
}
