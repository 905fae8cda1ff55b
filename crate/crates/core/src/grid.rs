use crate::error::{Error, Result};

/// Uniform grid on the unit cube `[0,1]^d` with `n` subdivisions per axis.
///
/// The spacing is always recomputed as `1/n` rather than stored, so it can
/// never drift from the subdivision count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    d: usize,
    n: usize,
}

impl GridSpec {
    /// Maximum cube dimension the reduced assembly supports.
    pub const MAX_DIMENSION: usize = 5;

    pub fn new(d: usize, n: usize) -> Result<Self> {
        if !(1..=Self::MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidParameter(format!(
                "dimension d must be in 1..={}, got {d}",
                Self::MAX_DIMENSION
            )));
        }
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "subdivision count n must be at least 2, got {n}"
            )));
        }
        Ok(Self { d, n })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn subdivisions(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = 1/n`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Half extent `k = floor(n/2)`: the largest axis index inside the
    /// fundamental domain after reflection.
    pub fn half_extent(&self) -> usize {
        self.n / 2
    }

    /// Number of interior grid points of the full (unreduced) grid.
    pub fn full_interior_count(&self) -> u64 {
        ((self.n - 1) as u64).pow(self.d as u32)
    }
}
