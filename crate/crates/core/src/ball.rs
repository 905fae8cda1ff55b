//! Radial finite difference system on the d-dimensional unit ball.
//!
//! Row i (at rho = i*h, i = 1..n-1):
//!
//! ```text
//! (u_{i-1} - 2 u_i + u_{i+1}) / h^2
//!   + (d-1)/(i h) * (u_{i+1} - u_{i-1}) / (2h)
//!   + lambda * exp(u_i) = 0
//! ```
//!
//! with `u_0 = u_1` (zero slope at the center) and `u_n = 0`. The center
//! value is eliminated analytically, keeping the system at n-1 unknowns. In
//! the fixed-amplitude formulation `u_0 = u_1 = A` and the unknowns are
//! `(lambda, u_2, ..., u_{n-1})`.

use crate::cube::Formulation;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::system::NonlinearSystem;

#[derive(Debug, Clone)]
pub struct BallSystem {
    d: usize,
    n: usize,
    formulation: Formulation,
}

/// Largest ball dimension supported (covers the monotone-branch regime).
pub const MAX_BALL_DIMENSION: usize = 10;

pub fn assemble_ball(d: usize, n: usize, formulation: Formulation) -> Result<BallSystem> {
    if !(1..=MAX_BALL_DIMENSION).contains(&d) {
        return Err(Error::InvalidParameter(format!(
            "ball dimension must be in 1..={MAX_BALL_DIMENSION}, got {d}"
        )));
    }
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "ball subdivisions must be at least 3, got {n}"
        )));
    }
    match formulation {
        Formulation::FixedLambda(l) if !l.is_finite() => {
            return Err(Error::InvalidParameter("lambda must be finite".into()))
        }
        Formulation::FixedAmplitude(a) if !(a.is_finite() && a >= 0.0) => {
            return Err(Error::InvalidParameter(
                "amplitude must be finite and >= 0".into(),
            ))
        }
        _ => {}
    }
    Ok(BallSystem { d, n, formulation })
}

impl BallSystem {
    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn subdivisions(&self) -> usize {
        self.n
    }

    pub fn formulation(&self) -> Formulation {
        self.formulation
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Advection coefficient of row i: `(d-1)/(i h) / (2h)`.
    fn advection(&self, i: usize) -> f64 {
        let n2 = (self.n as f64) * (self.n as f64);
        (self.d as f64 - 1.0) * n2 / (2.0 * i as f64)
    }

    fn inv_h2(&self) -> f64 {
        (self.n as f64) * (self.n as f64)
    }

    /// Radial values u_1..u_{n-1} from the unknown vector.
    pub fn radial_values(&self, x: &[f64]) -> Vec<f64> {
        match self.formulation {
            Formulation::FixedLambda(_) => x.to_vec(),
            Formulation::FixedAmplitude(a) => {
                let mut u = Vec::with_capacity(self.n - 1);
                u.push(a);
                u.extend_from_slice(&x[1..]);
                u
            }
        }
    }

    fn lambda_of(&self, x: &[f64]) -> f64 {
        match self.formulation {
            Formulation::FixedLambda(l) => l,
            Formulation::FixedAmplitude(_) => x[0],
        }
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
}

impl NonlinearSystem for BallSystem {
    fn unknown_count(&self) -> usize {
        self.n - 1
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        let u = self.radial_values(x);
        let lambda = self.lambda_of(x);
        let inv_h2 = self.inv_h2();
        let n = self.n;
        let mut r = Vec::with_capacity(n - 1);
        for i in 1..n {
            let ui = u[i - 1];
            let um = if i == 1 { u[0] } else { u[i - 2] };
            let up = if i == n - 1 { 0.0 } else { u[i] };
            let c = self.advection(i);
            r.push((um - 2.0 * ui + up) * inv_h2 + c * (up - um) + lambda * ui.exp());
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("residual".into()));
        }
        Ok(r)
    }

    fn jacobian(&self, x: &[f64]) -> Result<CsrMatrix> {
        self.check_state(x)?;
        let u = self.radial_values(x);
        let lambda = self.lambda_of(x);
        let inv_h2 = self.inv_h2();
        let n = self.n;
        let m = n - 1;
        let mut triplets = Vec::with_capacity(4 * m);
        match self.formulation {
            Formulation::FixedLambda(_) => {
                for i in 1..n {
                    let row = i - 1;
                    let c = self.advection(i);
                    let mut diag = -2.0 * inv_h2 + lambda * u[i - 1].exp();
                    if i == 1 {
                        // u_0 = u_1 folds the sub-diagonal term onto the diagonal.
                        diag += inv_h2 - c;
                    } else {
                        triplets.push((row, i - 2, inv_h2 - c));
                    }
                    triplets.push((row, row, diag));
                    if i + 1 < n {
                        triplets.push((row, i, inv_h2 + c));
                    }
                }
            }
            Formulation::FixedAmplitude(_) => {
                // Unknowns: (lambda, u_2, ..., u_{n-1}); u_j sits at column j - 1.
                for i in 1..n {
                    let row = i - 1;
                    let c = self.advection(i);
                    triplets.push((row, 0, u[i - 1].exp()));
                    if i >= 2 {
                        if i >= 3 {
                            triplets.push((row, i - 2, inv_h2 - c));
                        }
                        triplets.push((row, i - 1, -2.0 * inv_h2 + lambda * u[i - 1].exp()));
                    }
                    if i + 1 < n {
                        triplets.push((row, i, inv_h2 + c));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(m, m, &triplets)
    }

    fn field_values(&self, x: &[f64]) -> Vec<f64> {
        self.radial_values(x)
    }

    fn lambda_value(&self, x: &[f64]) -> f64 {
        self.lambda_of(x)
    }
}
