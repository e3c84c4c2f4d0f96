//! Matrix permanents: naive permutation enumeration and Ryser's
//! inclusion–exclusion formula with Gray-code ordered subsets.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default largest order accepted by [`permanent`].
pub const DEFAULT_MAX_PERMANENT_ORDER: usize = 24;

/// Orders below this use naive enumeration, at and above it Ryser.
pub const RYSER_SWITCHOVER: usize = 6;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SquareMatrix<T> {
    pub fn from_rows(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Argument("matrix must be at least 1×1".into()));
        }
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Argument("matrix is not square".into()));
        }
        Ok(Self { dim, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("matrix must be at least 1×1".into()));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.dim + col]
    }
}

/// `Σ_{σ∈S_m} Π_j M[j, σ(j)]` by direct enumeration, O(m!·m).
pub fn permanent_naive<T: Real>(matrix: &SquareMatrix<T>) -> Complex<T> {
    fn expand<T: Real>(m: &SquareMatrix<T>, row: usize, used: u32, prefix: Complex<T>) -> Complex<T> {
        if row == m.dim() {
            return prefix;
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for col in 0..m.dim() {
            if used & (1 << col) == 0 {
                acc = acc + expand(m, row + 1, used | (1 << col), prefix * m.get(row, col));
            }
        }
        acc
    }
    expand(matrix, 0, 0, Complex::new(T::one(), T::zero()))
}

/// Ryser's formula, O(2^m·m):
/// `perm(M) = (−1)^m Σ_{S⊆cols} (−1)^{|S|} Π_i Σ_{j∈S} M[i, j]`.
pub fn permanent_ryser<T: Real>(matrix: &SquareMatrix<T>) -> Complex<T> {
    let n = matrix.dim();
    let zero = Complex::new(T::zero(), T::zero());
    let mut row_sums = vec![zero; n];
    let mut total = zero;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        // the Gray code flips exactly one column per step
        let next = k ^ (k >> 1);
        let col = (gray ^ next).trailing_zeros() as usize;
        let added = next & (1 << col) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            let a = matrix.get(i, col);
            *s = if added { *s + a } else { *s - a };
        }
        gray = next;
        let prod = row_sums.iter().fold(Complex::new(T::one(), T::zero()), |p, s| p * s);
        if (n - next.count_ones() as usize).is_multiple_of(2) {
            total = total + prod;
        } else {
            total = total - prod;
        }
    }
    total
}

/// Permanent with the default order cap.
pub fn permanent<T: Real>(matrix: &SquareMatrix<T>) -> Result<Complex<T>> {
    permanent_capped(matrix, DEFAULT_MAX_PERMANENT_ORDER)
}

/// Naive enumeration below [`RYSER_SWITCHOVER`], Ryser at and above.
pub fn permanent_capped<T: Real>(matrix: &SquareMatrix<T>, max_order: usize) -> Result<Complex<T>> {
    let m = matrix.dim();
    if m > max_order || m > 63 {
        return Err(Error::Resource(format!("permanent of order {m} exceeds cap {max_order}")));
    }
    Ok(if m < RYSER_SWITCHOVER { permanent_naive(matrix) } else { permanent_ryser(matrix) })
}
