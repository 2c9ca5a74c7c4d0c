//! Even-dimensional dense carriers.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense real `2n x 2n` matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix2n<T: Scalar> {
    inner: DMatrix<T>,
}

/// Real vector of length `2n` with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector2n<T: Scalar> {
    inner: DVector<T>,
}

fn modes_of(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidDimension(format!(
            "dimension {dim} is not a positive even number"
        )));
    }
    Ok(dim / 2)
}

pub(crate) fn check_modes(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidDimension("mode count must be at least 1".into()));
    }
    Ok(())
}

impl<T: Scalar> Matrix2n<T> {
    /// Wraps a square matrix of even dimension, rejecting non-finite entries.
    pub fn new(m: DMatrix<T>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidDimension(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        modes_of(m.nrows())?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inner: m })
    }

    /// Builds from `2n * 2n` row-major entries.
    pub fn from_row_slice(n: usize, entries: &[T]) -> Result<Self> {
        check_modes(n)?;
        let d = 2 * n;
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, found: entries.len() });
        }
        Self::new(DMatrix::from_row_slice(d, d, entries))
    }

    /// Builds from rows; every row must have the same even length as the row count.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let d = rows.len();
        modes_of(d)?;
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.len() });
            }
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_modes(n)?;
        Ok(Self { inner: DMatrix::identity(2 * n, 2 * n) })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_modes(n)?;
        Ok(Self { inner: DMatrix::zeros(2 * n, 2 * n) })
    }

    /// Diagonal matrix from `2n` entries.
    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        modes_of(diag.len())?;
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    /// Internal constructor for results of arithmetic on validated operands.
    pub(crate) fn wrap(m: DMatrix<T>) -> Self {
        debug_assert!(m.nrows() == m.ncols() && m.nrows().is_multiple_of(2));
        Self { inner: m }
    }

    /// Mode count `n`.
    pub fn n(&self) -> usize {
        self.inner.nrows() / 2
    }

    /// Side length `2n`.
    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<T> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self::wrap(self.inner.transpose())
    }

    pub fn scale(&self, c: T) -> Self {
        Self::wrap(&self.inner * c)
    }

    pub fn norm_fro(&self) -> T {
        self.inner.norm()
    }

    /// Determinant from a partially pivoted LU factorization.
    pub fn determinant(&self) -> T {
        self.inner.clone().lu().determinant()
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.inner.clone().try_inverse().map(Self::wrap)
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        (0..self.dim()).map(|i| self.inner.row(i).iter().copied().collect()).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (&self.inner - &other.inner).amax()
    }
}

impl<T: Scalar> Vector2n<T> {
    pub fn new(v: DVector<T>) -> Result<Self> {
        modes_of(v.len())?;
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { inner: v })
    }

    pub fn from_slice(entries: &[T]) -> Result<Self> {
        Self::new(DVector::from_column_slice(entries))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_modes(n)?;
        Ok(Self { inner: DVector::zeros(2 * n) })
    }

    pub(crate) fn wrap(v: DVector<T>) -> Self {
        Self { inner: v }
    }

    pub fn n(&self) -> usize {
        self.inner.len() / 2
    }

    pub fn as_dvector(&self) -> &DVector<T> {
        &self.inner
    }

    pub fn norm(&self) -> T {
        self.inner.norm()
    }

    pub fn to_vec(&self) -> Vec<T> {
        self.inner.iter().copied().collect()
    }
}

impl<'a, T: Scalar> Mul<&'a Matrix2n<T>> for &'a Matrix2n<T> {
    type Output = Matrix2n<T>;
    fn mul(self, rhs: &'a Matrix2n<T>) -> Matrix2n<T> {
        Matrix2n::wrap(&self.inner * &rhs.inner)
    }
}

impl<'a, T: Scalar> Add<&'a Matrix2n<T>> for &'a Matrix2n<T> {
    type Output = Matrix2n<T>;
    fn add(self, rhs: &'a Matrix2n<T>) -> Matrix2n<T> {
        Matrix2n::wrap(&self.inner + &rhs.inner)
    }
}

impl<'a, T: Scalar> Sub<&'a Matrix2n<T>> for &'a Matrix2n<T> {
    type Output = Matrix2n<T>;
    fn sub(self, rhs: &'a Matrix2n<T>) -> Matrix2n<T> {
        Matrix2n::wrap(&self.inner - &rhs.inner)
    }
}

impl<T: Scalar> Neg for &Matrix2n<T> {
    type Output = Matrix2n<T>;
    fn neg(self) -> Matrix2n<T> {
        Matrix2n::wrap(-&self.inner)
    }
}

/// Extreme singular values `(smallest, largest)`.
pub(crate) fn singular_extremes<T: Scalar>(m: &DMatrix<T>) -> (T, T) {
    let sv = m.clone().singular_values();
    let mut lo = T::max_value().unwrap_or_else(|| sv.max());
    let mut hi = T::zero();
    for &s in sv.iter() {
        if s < lo {
            lo = s;
        }
        if s > hi {
            hi = s;
        }
    }
    (lo, hi)
}
