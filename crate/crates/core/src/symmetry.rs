//! Reflection, sorting, and ranking maps that collapse the full grid index
//! set onto the fundamental simplex `1 <= i_1 <= ... <= i_d <= k`, plus the
//! combinatorial variable counts.
//!
//! Packed indices are 1-based; 0 is the boundary sentinel.

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Binomial coefficient with u128 intermediates; returns 0 when `k > n`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
    }
    acc as u64
}

/// Number of reduced unknowns for dimension `d` and `n` subdivisions:
/// the count of nondecreasing d-tuples over `1..=floor(n/2)`.
pub fn variable_count(d: usize, n: usize) -> Result<u64> {
    if d < 1 {
        return Err(Error::InvalidParameter(format!(
            "dimension d must be at least 1, got {d}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "subdivision count n must be at least 2, got {n}"
        )));
    }
    let k = (n / 2) as u64;
    Ok(binomial(k + d as u64 - 1, d as u64))
}

/// Folds an axis index into the fundamental half: `min(i, n - i)`.
pub fn reflect(i: usize, n: usize) -> Result<usize> {
    if i > n {
        return Err(Error::InvalidParameter(format!(
            "axis index {i} outside 0..={n}"
        )));
    }
    Ok(i.min(n - i))
}

/// Bijection between nondecreasing index tuples and packed indices `1..=m`,
/// ordered lexicographically. Tuples touching the boundary map to 0.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct SymmetricIndexMap {
    grid: GridSpec,
    m: usize,
}

impl SymmetricIndexMap {
    pub fn new(grid: GridSpec) -> Self {
        let m = variable_count(grid.dimension(), grid.subdivisions())
            .expect("GridSpec is already validated") as usize;
        Self { grid, m }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of reduced unknowns.
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Sum over `v` in `a..=b` of the number of nondecreasing r-tuples with
    /// values in `v..=k` (hockey-stick closed form).
    fn prefix_count(&self, a: usize, b: usize, r: usize) -> u64 {
        if b < a {
            return 0;
        }
        let k = self.grid.half_extent() as u64;
        let r = r as u64;
        binomial(k - a as u64 + r + 1, r + 1) - binomial(k + r - b as u64, r + 1)
    }

    /// Packed index of a nondecreasing tuple with entries in `1..=k`.
    ///
    /// The caller is responsible for canonicalization; use
    /// [`canonical_index`](Self::canonical_index) for raw grid coordinates.
    pub fn rank(&self, tuple: &[usize]) -> Result<usize> {
        let d = self.grid.dimension();
        let k = self.grid.half_extent();
        if tuple.len() != d {
            return Err(Error::InvalidParameter(format!(
                "tuple length {} does not match dimension {d}",
                tuple.len()
            )));
        }
        let mut p: u64 = 1;
        let mut lo = 1usize;
        for (j, &v) in tuple.iter().enumerate() {
            if v < lo || v > k {
                return Err(Error::InvalidParameter(format!(
                    "tuple {tuple:?} is not nondecreasing within 1..={k}"
                )));
            }
            let r = d - 1 - j;
            p += self.prefix_count(lo, v - 1, r);
            lo = v;
        }
        Ok(p as usize)
    }

    /// Inverse of [`rank`](Self::rank): the unique nondecreasing tuple with
    /// packed index `p` in `1..=m`.
    pub fn unrank(&self, p: usize) -> Result<Vec<usize>> {
        if p < 1 || p > self.m {
            return Err(Error::InvalidParameter(format!(
                "packed index {p} outside 1..={}",
                self.m
            )));
        }
        let d = self.grid.dimension();
        let k = self.grid.half_extent();
        let mut remaining = (p - 1) as u64;
        let mut tuple = Vec::with_capacity(d);
        let mut lo = 1usize;
        for j in 0..d {
            let r = d - 1 - j;
            // Smallest v with prefix_count(lo, v, r) > remaining.
            let (mut a, mut b) = (lo, k);
            while a < b {
                let mid = (a + b) / 2;
                if self.prefix_count(lo, mid, r) > remaining {
                    b = mid;
                } else {
                    a = mid + 1;
                }
            }
            remaining -= self.prefix_count(lo, a - 1, r);
            tuple.push(a);
            lo = a;
        }
        Ok(tuple)
    }

    /// Packed index of an arbitrary grid coordinate tuple: reflect each axis,
    /// sort nondecreasing, rank. Coordinates that reflect onto the boundary
    /// return the sentinel 0.
    pub fn canonical_index(&self, coords: &[usize]) -> Result<usize> {
        let d = self.grid.dimension();
        let n = self.grid.subdivisions();
        if coords.len() != d {
            return Err(Error::InvalidParameter(format!(
                "coordinate tuple length {} does not match dimension {d}",
                coords.len()
            )));
        }
        let mut folded = [0usize; GridSpec::MAX_DIMENSION];
        for (slot, &c) in folded.iter_mut().zip(coords) {
            let f = reflect(c, n)?;
            if f == 0 {
                return Ok(0);
            }
            *slot = f;
        }
        let folded = &mut folded[..d];
        folded.sort_unstable();
        self.rank(folded)
    }

    /// Number of full-grid points in the symmetry orbit of a reduced tuple:
    /// distinct permutations times the reflection preimages per axis.
    pub fn orbit_size(&self, tuple: &[usize]) -> Result<u64> {
        let d = self.grid.dimension();
        let n = self.grid.subdivisions();
        let k = self.grid.half_extent();
        if tuple.len() != d {
            return Err(Error::InvalidParameter(format!(
                "tuple length {} does not match dimension {d}",
                tuple.len()
            )));
        }
        let mut perms: u64 = (1..=d as u64).product();
        let mut run = 1u64;
        for j in 1..d {
            if tuple[j] == tuple[j - 1] {
                run += 1;
            } else {
                run = 1;
            }
            perms /= if tuple[j] == tuple[j - 1] { run } else { 1 };
        }
        let mut reflections = 1u64;
        for &v in tuple {
            // The midpoint of an even grid is its own reflection.
            if !(n.is_multiple_of(2) && v == k) {
                reflections *= 2;
            }
        }
        Ok(perms * reflections)
    }

    /// Lexicographic iterator over all nondecreasing tuples, i.e. packed
    /// indices 1, 2, ..., m in order.
    pub fn tuples(&self) -> TupleIter {
        TupleIter {
            k: self.grid.half_extent(),
            next: Some(vec![1; self.grid.dimension()]),
        }
    }
}

pub struct TupleIter {
    k: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        // Lexicographic successor: bump the rightmost entry below k and
        // level everything after it.
        let mut succ = current.clone();
        let mut j = succ.len();
        loop {
            if j == 0 {
                self.next = None;
                break;
            }
            j -= 1;
            if succ[j] < self.k {
                let v = succ[j] + 1;
                for slot in succ[j..].iter_mut() {
                    *slot = v;
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}
