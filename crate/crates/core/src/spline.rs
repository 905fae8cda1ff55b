//! Natural cubic spline interpolation and interior-maximum location.
//!
//! The turning-point procedure samples the continuation parameter on a fine
//! window and reads the fold off the spline's interior maximum, so the
//! derivative root-finding here has to be exact per interval: the derivative
//! is piecewise quadratic and is solved in closed form.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Second derivatives at the knots (zero at both ends).
    m: Vec<f64>,
}

impl CubicSpline {
    /// Natural cubic spline through strictly increasing knots.
    pub fn natural(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidParameter(format!(
                "knot count mismatch: {} xs vs {} ys",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidParameter(
                "spline needs at least two knots".into(),
            ));
        }
        if !xs.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "spline knots must be strictly increasing".into(),
            ));
        }
        if xs.iter().chain(ys).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("spline knots".into()));
        }

        let n = xs.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Tridiagonal system for the interior second derivatives.
            let rows = n - 2;
            let mut diag = vec![0.0; rows];
            let mut upper = vec![0.0; rows];
            let mut lower = vec![0.0; rows];
            let mut rhs = vec![0.0; rows];
            for i in 0..rows {
                let h0 = xs[i + 1] - xs[i];
                let h1 = xs[i + 2] - xs[i + 1];
                lower[i] = h0 / 6.0;
                diag[i] = (h0 + h1) / 3.0;
                upper[i] = h1 / 6.0;
                rhs[i] = (ys[i + 2] - ys[i + 1]) / h1 - (ys[i + 1] - ys[i]) / h0;
            }
            // Thomas algorithm; the matrix is strictly diagonally dominant.
            for i in 1..rows {
                let w = lower[i] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[rows] = rhs[rows - 1] / diag[rows - 1];
            for i in (0..rows - 1).rev() {
                m[i + 1] = (rhs[i] - upper[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    fn interval_of(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.clamp(1, self.xs.len() - 1) - 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.interval_of(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = x - self.xs[i];
        let s = self.xs[i + 1] - x;
        self.m[i] * s * s * s / (6.0 * h)
            + self.m[i + 1] * t * t * t / (6.0 * h)
            + (self.ys[i] / h - self.m[i] * h / 6.0) * s
            + (self.ys[i + 1] / h - self.m[i + 1] * h / 6.0) * t
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.interval_of(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = x - self.xs[i];
        let s = self.xs[i + 1] - x;
        -self.m[i] * s * s / (2.0 * h)
            + self.m[i + 1] * t * t / (2.0 * h)
            + (self.ys[i + 1] - self.ys[i]) / h
            - (self.m[i + 1] - self.m[i]) * h / 6.0
    }

    /// All x where the spline derivative vanishes, strictly inside the knot
    /// range. On each interval the derivative is `a t^2 + b t + c`.
    pub fn critical_points(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let n = self.xs.len();
        for i in 0..n - 1 {
            let h = self.xs[i + 1] - self.xs[i];
            let d = (self.ys[i + 1] - self.ys[i]) / h - (self.m[i + 1] - self.m[i]) * h / 6.0;
            let a = (self.m[i + 1] - self.m[i]) / (2.0 * h);
            let b = self.m[i];
            let c = d - self.m[i] * h / 2.0;

            let scale = a.abs().max(b.abs()).max(c.abs());
            if scale == 0.0 {
                continue; // flat interval
            }
            let mut roots = [f64::NAN; 2];
            let mut count = 0;
            if a.abs() <= 1e-14 * scale {
                if b.abs() > 1e-14 * scale {
                    roots[0] = -c / b;
                    count = 1;
                }
            } else {
                let disc = b * b - 4.0 * a * c;
                if disc >= 0.0 {
                    let sq = disc.sqrt();
                    // Stable quadratic roots.
                    let q = -0.5 * (b + b.signum() * sq);
                    let (r1, r2) = if b == 0.0 {
                        let r = sq / (2.0 * a);
                        (r, -r)
                    } else {
                        (q / a, if q != 0.0 { c / q } else { f64::NAN })
                    };
                    roots[0] = r1;
                    count = 1;
                    if r2.is_finite() && r2 != r1 {
                        roots[1] = r2;
                        count = 2;
                    }
                }
            }
            for &t in roots.iter().take(count) {
                if t.is_finite() && t >= -1e-12 * h && t <= h * (1.0 + 1e-12) {
                    let x = (self.xs[i] + t).clamp(self.xs[i], self.xs[i + 1]);
                    if x > self.xs[0] && x < self.xs[n - 1] {
                        out.push(x);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * (self.xs[n - 1] - self.xs[0]).abs());
        out
    }
}

/// Location and value of the interior maximum of the natural cubic spline
/// through `points`. Errors if the maximum sits on the window edge or the
/// data is flat.
pub fn spline_max(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 5 {
        return Err(Error::InvalidParameter(format!(
            "interior maximum needs at least 5 samples, got {}",
            points.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let spread = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ys.iter().cloned().fold(f64::INFINITY, f64::min);
    if spread == 0.0 {
        return Err(Error::DegenerateSpline);
    }
    let spline = CubicSpline::natural(&xs, &ys)?;
    let mut best: Option<(f64, f64)> = None;
    for x in spline.critical_points() {
        let v = spline.eval(x);
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((x, v));
        }
    }
    let edge = ys[0].max(ys[ys.len() - 1]);
    match best {
        Some((x, v)) if v >= edge => Ok((x, v)),
        _ => {
            let a = if ys[0] >= ys[ys.len() - 1] {
                xs[0]
            } else {
                xs[xs.len() - 1]
            };
            Err(Error::MaxAtWindowEdge { a })
        }
    }
}
