//! Cross-route checks: the reduced system against the full grid, Jacobians
//! against finite differences, Newton against its quadratic-convergence
//! signature, the radial system against a hand-built reference, and bitwise
//! determinism of the whole pipeline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bratu_core::io::branch_csv_string;
use bratu_core::*;

fn cfg() -> NewtonConfig {
    NewtonConfig::default()
}

#[test]
fn oracle_equivalence_covers_odd_grids_and_both_parameters() {
    for d in [2usize, 3] {
        for n in [5usize, 6, 9, 10] {
            for formulation in [
                Formulation::FixedLambda(0.5),
                Formulation::FixedLambda(1.0),
                Formulation::FixedAmplitude(1.0),
            ] {
                let r = compare_sfdm_fdm(d, n, formulation, &cfg()).unwrap();
                assert!(
                    r.sup_norm_difference <= 1e-10,
                    "d={d} n={n} {formulation:?}: sup {}",
                    r.sup_norm_difference
                );
            }
        }
    }
}

#[test]
fn jacobians_match_central_differences_at_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut checked = 0usize;
    for _ in 0..20 {
        let d = rng.gen_range(1..=3usize);
        let n = rng.gen_range(4..=10usize);
        let fixed_amplitude = rng.gen_bool(0.5);
        let formulation = if fixed_amplitude {
            Formulation::FixedAmplitude(rng.gen_range(0.2..1.5))
        } else {
            Formulation::FixedLambda(rng.gen_range(0.2..1.5))
        };
        let sys = assemble_sfdm(GridSpec::new(d, n).unwrap(), formulation).unwrap();
        let m = sys.unknown_count();
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-0.4..0.8)).collect();

        let jac = sys.jacobian(&x).unwrap();
        let eps = 1e-7;
        for col in 0..m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[col] += eps;
            xm[col] -= eps;
            let rp = sys.residual(&xp).unwrap();
            let rm = sys.residual(&xm).unwrap();
            for row in 0..m {
                let fd = (rp[row] - rm[row]) / (2.0 * eps);
                let an = jac.get(row, col);
                let scale = an.abs().max(fd.abs()).max(1.0);
                assert!(
                    (fd - an).abs() / scale <= 1e-6,
                    "d={d} n={n} {formulation:?} ({row},{col}): fd {fd} vs {an}"
                );
            }
        }
        checked += 1;
    }
    assert_eq!(checked, 20);
}

#[test]
fn reduced_residual_rows_match_full_grid_rows_under_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let grid = GridSpec::new(3, 8).unwrap();
    let lambda = 0.7;
    let reduced = assemble_sfdm(grid, Formulation::FixedLambda(lambda)).unwrap();
    let full = assemble_fdm(grid, Formulation::FixedLambda(lambda)).unwrap();

    let u_reduced: Vec<f64> = (0..reduced.unknown_count())
        .map(|_| rng.gen_range(-0.5..1.0))
        .collect();
    let r_reduced = reduced.residual(&u_reduced).unwrap();

    let field = reconstruct_full(&u_reduced, reduced.index_map()).unwrap();
    let mut u_full = Vec::with_capacity(full.unknown_count());
    let n = grid.subdivisions();
    for i in 1..n {
        for j in 1..n {
            for k in 1..n {
                u_full.push(field.get(&[i, j, k]));
            }
        }
    }
    let r_full = full.residual(&u_full).unwrap();

    // The reduced equation at tuple t is the full-grid equation at the
    // representative point t under a symmetric state.
    for (p, tuple) in reduced.index_map().tuples().enumerate() {
        let step = n - 1;
        let full_idx = ((tuple[0] - 1) * step + (tuple[1] - 1)) * step + (tuple[2] - 1);
        assert!(
            (r_reduced[p] - r_full[full_idx]).abs() <= 1e-12,
            "row {p} ({tuple:?})"
        );
    }
}

#[test]
fn newton_shows_quadratic_convergence_signature() {
    // Tightening the tolerance to 1e-12 still converges from zeros within 8
    // iterations at n = 1000.
    let sys = assemble_sfdm(
        GridSpec::new(1, 1_000).unwrap(),
        Formulation::FixedLambda(1.0),
    )
    .unwrap();
    let config = NewtonConfig {
        tolerance: 1e-12,
        ..NewtonConfig::default()
    };
    let state = newton_solve(&sys, &sys.zero_state(), &config).unwrap();
    assert!(state.converged);
    assert!(
        state.iterations <= 8,
        "expected quadratic convergence, took {} iterations",
        state.iterations
    );
}

#[test]
fn lower_solution_norm_matches_independent_cross_check() {
    // Independent higher-order computations put the lambda = 1 lower
    // solution's sup norm near 0.0586; loose 1e-3 agreement.
    let sys = assemble_sfdm(GridSpec::new(3, 40).unwrap(), Formulation::FixedLambda(1.0)).unwrap();
    let state = newton_solve(&sys, &sys.zero_state(), &cfg()).unwrap();
    assert!(state.converged);
    let max_u = SolutionState::sup_norm(&sys.grid_values(&state.unknowns));
    assert!(
        (max_u - 0.05855645).abs() <= 1e-3,
        "sup norm {max_u} vs 0.0586"
    );
}

#[test]
fn one_dimensional_solution_peaks_at_the_center() {
    let sys = assemble_sfdm(
        GridSpec::new(1, 100).unwrap(),
        Formulation::FixedLambda(1.0),
    )
    .unwrap();
    let state = newton_solve(&sys, &sys.zero_state(), &cfg()).unwrap();
    assert!(state.converged);
    let field = reconstruct_full(&sys.grid_values(&state.unknowns), sys.index_map()).unwrap();
    let max_at = (0..=100)
        .max_by(|&a, &b| field.get(&[a]).partial_cmp(&field.get(&[b])).unwrap())
        .unwrap();
    assert_eq!(max_at, 50);
}

#[test]
fn sparse_solve_validates_by_substitution_on_the_d3_linear_part() {
    let sys = assemble_sfdm(GridSpec::new(3, 6).unwrap(), Formulation::FixedLambda(0.0)).unwrap();
    let a = sys.linear_part();
    let mut rhs = vec![0.0; 10];
    rhs[0] = 1.0;
    let x = linsolve::sparse_solve(a, &rhs).unwrap();
    let mut back = vec![0.0; 10];
    a.matvec(&x, &mut back);
    for (b, r) in back.iter().zip(&rhs) {
        assert!((b - r).abs() <= 1e-12);
    }
}

/// Dense LU with partial pivoting, written independently of the solver path.
#[allow(clippy::needless_range_loop)]
fn dense_solve_oracle(a: &CsrMatrix, rhs: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut m = vec![vec![0.0f64; n + 1]; n];
    for r in 0..n {
        for (c, v) in a.row(r) {
            m[r][c] += v;
        }
        m[r][n] = rhs[r];
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, pivot);
        let p = m[col][col];
        assert!(p.abs() > 0.0, "singular oracle system");
        for r in col + 1..n {
            let f = m[r][col] / p;
            for c in col..=n {
                let upper = m[col][c];
                m[r][c] -= f * upper;
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for c in r + 1..n {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    x
}

#[test]
fn sparse_solve_matches_dense_oracle_on_the_radial_jacobian() {
    let sys = assemble_ball(3, 50, Formulation::FixedLambda(0.0)).unwrap();
    let x0 = sys.zero_state();
    let jac = sys.jacobian(&x0).unwrap();
    let rhs: Vec<f64> = (0..jac.nrows())
        .map(|i| ((i * 13 % 7) as f64) - 3.0)
        .collect();
    let fast = linsolve::sparse_solve(&jac, &rhs).unwrap();
    let oracle = dense_solve_oracle(&jac, &rhs);
    let scale = oracle.iter().map(|v| v.abs()).fold(1.0f64, f64::max);
    for (f, o) in fast.iter().zip(&oracle) {
        assert!((f - o).abs() / scale <= 1e-12, "{f} vs {o}");
    }
}

/// The radial system at d = 1, written out by hand: u'' + lambda e^u with a
/// reflecting left end (u_0 = u_1) and a clamped right end.
struct HandBuilt1d {
    n: usize,
    a: f64,
}

impl NonlinearSystem for HandBuilt1d {
    fn unknown_count(&self) -> usize {
        self.n - 1
    }

    fn residual(&self, x: &[f64]) -> bratu_core::Result<Vec<f64>> {
        let n = self.n;
        let inv_h2 = (n * n) as f64;
        let lambda = x[0];
        let u = |i: usize| -> f64 {
            if i == n {
                0.0
            } else if i <= 1 {
                self.a
            } else {
                x[i - 1]
            }
        };
        Ok((1..n)
            .map(|i| (u(i - 1) - 2.0 * u(i) + u(i + 1)) * inv_h2 + lambda * u(i).exp())
            .collect())
    }

    fn jacobian(&self, x: &[f64]) -> bratu_core::Result<CsrMatrix> {
        let n = self.n;
        let inv_h2 = (n * n) as f64;
        let lambda = x[0];
        let u = |i: usize| -> f64 {
            if i == n {
                0.0
            } else if i <= 1 {
                self.a
            } else {
                x[i - 1]
            }
        };
        let mut t = Vec::new();
        for i in 1..n {
            let row = i - 1;
            t.push((row, 0, u(i).exp()));
            if i >= 2 {
                if i >= 3 {
                    t.push((row, i - 2, inv_h2));
                }
                t.push((row, i - 1, -2.0 * inv_h2 + lambda * u(i).exp()));
            }
            if i + 1 < n {
                t.push((row, i, inv_h2));
            }
        }
        Ok(CsrMatrix::from_triplets(n - 1, n - 1, &t).unwrap())
    }

    fn field_values(&self, x: &[f64]) -> Vec<f64> {
        let mut u = vec![self.a];
        u.extend_from_slice(&x[1..]);
        u
    }

    fn lambda_value(&self, x: &[f64]) -> f64 {
        x[0]
    }
}

#[test]
fn radial_d1_matches_hand_built_reflection_system() {
    let n = 400;
    for amp in [0.5, 1.0, 2.0, 3.0] {
        let ball = assemble_ball(1, n, Formulation::FixedAmplitude(amp)).unwrap();
        let hand = HandBuilt1d { n, a: amp };
        let s1 = newton_solve(&ball, &ball.zero_state(), &cfg()).unwrap();
        let s2 = newton_solve(&hand, &hand.zero_state(), &cfg()).unwrap();
        assert!(s1.converged && s2.converged);
        assert!(
            (s1.unknowns[0] - s2.unknowns[0]).abs() <= 1e-12,
            "A={amp}: {} vs {}",
            s1.unknowns[0],
            s2.unknowns[0]
        );
        for (a, b) in s1.unknowns.iter().zip(&s2.unknowns) {
            assert!((a - b).abs() <= 1e-12);
        }
    }
}

#[test]
fn radial_d1_fold_rescales_onto_the_unit_interval_value() {
    // The d = 1 ball is the double interval; its fold times 4 approaches the
    // unit-interval fold. The reflecting end `u_0 = u_1` is first-order
    // accurate here (the grid effectively reflects at rho = h/2), so the
    // check is rate-aware: errors halve with n, and one Richardson step
    // recovers the continuum value.
    let fold = |n: usize| {
        locate_turning_point(&BratuProblem::Ball { d: 1, n }, 1.2, 0.1, 101, &cfg())
            .unwrap()
            .lambda_star
    };
    let coarse = fold(1_000);
    let fine = fold(2_000);
    let exact = continuum_fold_1d() / 4.0;
    let ratio = (coarse - exact).abs() / (fine - exact).abs();
    assert!(
        (1.8..=2.2).contains(&ratio),
        "first-order rate expected, got {ratio}"
    );
    let extrapolated = 2.0 * fine - coarse;
    let rescaled = domain_scale(extrapolated, DomainScale::DoubleToUnit);
    assert!(
        (rescaled - 3.513830719).abs() <= 5e-6,
        "4 * {extrapolated:.9} = {rescaled:.9}"
    );
}

#[test]
fn radial_branches_follow_the_dimension_classification() {
    // d = 3: the branch oscillates about 2(d-2) = 2, crossing it repeatedly.
    let branch = trace_branch(
        &BratuProblem::Ball { d: 3, n: 100_000 },
        0.1,
        0.1,
        20.0,
        &cfg(),
    )
    .unwrap();
    let lambdas: Vec<f64> = branch.converged_points().map(|p| p.lambda).collect();
    assert_eq!(lambdas.len(), 200);
    let tilde = 2.0;
    let crossings = lambdas
        .windows(2)
        .filter(|w| (w[0] - tilde).signum() != (w[1] - tilde).signum())
        .count();
    assert!(crossings >= 3, "only {crossings} crossings of lambda = 2");
    assert!(branch.fold_count() >= 3);

    // d = 10: monotone (to solver noise) increase toward 2(d-2) = 16, no fold.
    let branch = trace_branch(
        &BratuProblem::Ball { d: 10, n: 10_000 },
        0.1,
        0.1,
        20.0,
        &cfg(),
    )
    .unwrap();
    let lambdas: Vec<f64> = branch.converged_points().map(|p| p.lambda).collect();
    for w in lambdas.windows(2) {
        assert!(w[1] >= w[0] - 1e-6, "decrease {} -> {}", w[0], w[1]);
    }
    let last = *lambdas.last().unwrap();
    assert!((last - 16.0).abs() <= 1e-3, "asymptote {last}");
    assert!(lambdas.iter().all(|&l| l <= 16.0 + 1e-6));
}

#[test]
fn radial_solutions_decrease_monotonically() {
    for (d, param) in [(2usize, 1.5f64), (3, 2.0), (5, 1.0)] {
        let sys = assemble_ball(d, 500, Formulation::FixedAmplitude(param)).unwrap();
        let state = newton_solve(&sys, &sys.zero_state(), &cfg()).unwrap();
        assert!(state.converged);
        let u = sys.radial_values(&state.unknowns);
        for w in u.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
        assert!(*u.last().unwrap() >= 0.0);
    }
}

#[test]
fn oracle_size_ratios_match_the_3d_reference_column() {
    for (n, expected) in [(10usize, 20.83), (20, 31.18), (30, 35.87), (40, 38.52)] {
        let r = compare_sfdm_fdm(3, n, Formulation::FixedLambda(1.0), &cfg()).unwrap();
        assert!(
            (r.ratio - expected).abs() <= 5e-3,
            "n={n}: ratio {} vs {expected}",
            r.ratio
        );
        assert!(r.sup_norm_difference <= 1e-10);
    }
}

#[test]
fn three_dimensional_n20_branch_shows_three_folds() {
    let branch = trace_branch(&BratuProblem::Cube { d: 3, n: 20 }, 0.1, 0.1, 16.0, &cfg()).unwrap();
    assert_eq!(branch.fold_count(), 3, "n = 20 diagram has three folds");
    let peak = branch
        .converged_points()
        .map(|p| p.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    // The sampled maximum sits just under the interpolated fold at 9.9019.
    assert!(peak <= 9.901885433 && peak > 9.89, "sampled peak {peak:.9}");
}

#[test]
fn assembly_and_solves_are_bitwise_deterministic() {
    let grid = GridSpec::new(3, 12).unwrap();
    let s1 = assemble_sfdm(grid, Formulation::FixedAmplitude(1.0)).unwrap();
    let s2 = assemble_sfdm(grid, Formulation::FixedAmplitude(1.0)).unwrap();
    assert_eq!(s1.linear_part(), s2.linear_part());

    let n1 = newton_solve(&s1, &s1.zero_state(), &cfg()).unwrap();
    let n2 = newton_solve(&s2, &s2.zero_state(), &cfg()).unwrap();
    assert_eq!(n1.unknowns, n2.unknowns);
    assert_eq!(n1.iterations, n2.iterations);

    // Residual evaluation against the shared linear part is bitwise stable.
    let r1 = s1.residual(&n1.unknowns).unwrap();
    let r2 = s2.residual(&n2.unknowns).unwrap();
    assert_eq!(r1, r2);

    let problem = BratuProblem::Cube { d: 2, n: 30 };
    let b1 = trace_branch(&problem, 0.2, 0.2, 2.0, &cfg()).unwrap();
    let b2 = trace_branch(&problem, 0.2, 0.2, 2.0, &cfg()).unwrap();
    assert_eq!(branch_csv_string(&b1), branch_csv_string(&b2));

    let t1 = locate_turning_point(&problem, 1.39, 0.1, 21, &cfg()).unwrap();
    let t2 = locate_turning_point(&problem, 1.39, 0.1, 21, &cfg()).unwrap();
    assert_eq!(t1.lambda_star.to_bits(), t2.lambda_star.to_bits());
}
