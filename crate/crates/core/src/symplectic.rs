//! The symplectic form, the fixed involutions `D` and `Z`, and structure checks.
//!
//! All matrices use the block layout `J = [[0, -I], [I, 0]]`, i.e. the first
//! `n` coordinates are positions and the last `n` are momenta.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{check_modes, Matrix2n};
use crate::scalar::{lit, Scalar};

/// Structure classes with their defining residual matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    /// `S J S^T - J`
    Symplectic,
    /// `T J T^T + J`
    AntiSymplectic,
    /// `(J H)^T - J H`
    Hamiltonian,
    /// `(J M)^T + J M`
    SkewHamiltonian,
    /// `X^T - X`
    Symmetric,
    /// `X^T + X`
    SkewSymmetric,
}

impl StructureKind {
    pub const ALL: [StructureKind; 6] = [
        StructureKind::Symplectic,
        StructureKind::AntiSymplectic,
        StructureKind::Hamiltonian,
        StructureKind::SkewHamiltonian,
        StructureKind::Symmetric,
        StructureKind::SkewSymmetric,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StructureKind::Symplectic => "symplectic",
            StructureKind::AntiSymplectic => "anti_symplectic",
            StructureKind::Hamiltonian => "hamiltonian",
            StructureKind::SkewHamiltonian => "skew_hamiltonian",
            StructureKind::Symmetric => "symmetric",
            StructureKind::SkewSymmetric => "skew_symmetric",
        }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        StructureKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| Error::InvalidDimension(format!("unknown structure kind '{s}'")))
    }
}

/// Thresholds used for every accept/reject decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TolerancePolicy {
    /// Relative residual threshold.
    pub rel_tol: f64,
    /// Threshold for treating an eigenvalue as real (and as zero).
    pub imag_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-9, imag_tol: 1e-9 }
    }
}

impl TolerancePolicy {
    pub fn new(rel_tol: f64, imag_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0 && imag_tol > 0.0 && rel_tol.is_finite() && imag_tol.is_finite()) {
            return Err(Error::InvalidDimension(format!(
                "tolerances must be finite and strictly positive (rel_tol={rel_tol}, imag_tol={imag_tol})"
            )));
        }
        Ok(Self { rel_tol, imag_tol })
    }

    pub fn with_rel_tol(rel_tol: f64) -> Result<Self> {
        Self::new(rel_tol, TolerancePolicy::default().imag_tol)
    }

    /// Acceptance bound for a residual that is quadratic in a matrix of norm `input_norm`.
    pub fn bound<T: Scalar>(&self, input_norm: T) -> T {
        lit::<T>(self.rel_tol) * (T::one() + input_norm * input_norm)
    }

    pub fn accepts<T: Scalar>(&self, residual: T, input_norm: T) -> bool {
        residual <= self.bound(input_norm)
    }
}

/// Verdict of [`check_structure`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureCheck<T> {
    pub holds: bool,
    /// Frobenius norm of the defining residual matrix.
    pub residual: T,
}

pub(crate) fn j_dense<T: Scalar>(n: usize) -> DMatrix<T> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -T::one();
        j[(n + i, i)] = T::one();
    }
    j
}

pub(crate) fn d_dense<T: Scalar>(n: usize) -> DMatrix<T> {
    let mut d = DMatrix::identity(2 * n, 2 * n);
    for i in n..2 * n {
        d[(i, i)] = -T::one();
    }
    d
}

pub(crate) fn z_dense<T: Scalar>(n: usize) -> DMatrix<T> {
    let mut z = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        z[(i, n + i)] = -T::one();
        z[(n + i, i)] = -T::one();
    }
    z
}

/// `J = [[0, -I_n], [I_n, 0]]`.
pub fn symplectic_form<T: Scalar>(n: usize) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    Ok(Matrix2n::wrap(j_dense(n)))
}

/// `D = diag(I_n, -I_n)`.
pub fn signature_matrix<T: Scalar>(n: usize) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    Ok(Matrix2n::wrap(d_dense(n)))
}

/// `Z = [[0, -I_n], [-I_n, 0]]`, the anti-symplectic involution with `J Z = D`.
pub fn swap_matrix<T: Scalar>(n: usize) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    Ok(Matrix2n::wrap(z_dense(n)))
}

/// Multiplies `J` from the left without forming it: rows `[-x_p; x_q]`.
pub(crate) fn j_left<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    let n = x.nrows() / 2;
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        for i in 0..n {
            out[(i, j)] = -x[(n + i, j)];
            out[(n + i, j)] = x[(i, j)];
        }
    }
    out
}

/// Multiplies `J` from the right: columns `[x_p, -x_q]`.
pub(crate) fn j_right<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    let n = x.ncols() / 2;
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for i in 0..x.nrows() {
        for j in 0..n {
            out[(i, j)] = x[(i, n + j)];
            out[(i, n + j)] = -x[(i, j)];
        }
    }
    out
}

pub(crate) fn structure_residual_dense<T: Scalar>(x: &DMatrix<T>, kind: StructureKind) -> T {
    let n = x.nrows() / 2;
    match kind {
        StructureKind::Symplectic => (x * j_left(&x.transpose()) - j_dense::<T>(n)).norm(),
        StructureKind::AntiSymplectic => (x * j_left(&x.transpose()) + j_dense::<T>(n)).norm(),
        StructureKind::Hamiltonian => {
            let jx = j_left(x);
            (jx.transpose() - jx).norm()
        }
        StructureKind::SkewHamiltonian => {
            let jx = j_left(x);
            (jx.transpose() + jx).norm()
        }
        StructureKind::Symmetric => (x.transpose() - x).norm(),
        StructureKind::SkewSymmetric => (x.transpose() + x).norm(),
    }
}

/// Frobenius norm of the residual defining `kind`, and whether it is within
/// `tol.rel_tol * (1 + ||X||_F^2)`.
pub fn check_structure<T: Scalar>(
    x: &Matrix2n<T>,
    kind: StructureKind,
    tol: &TolerancePolicy,
) -> StructureCheck<T> {
    let residual = structure_residual_dense(x.as_dmatrix(), kind);
    StructureCheck { holds: tol.accepts(residual, x.norm_fro()), residual }
}

/// `-X J X^T J`
pub(crate) fn assoc_dense<T: Scalar>(x: &DMatrix<T>) -> DMatrix<T> {
    -j_right(&(x * j_left(&x.transpose())))
}

/// `Y = -X J X^T J`, which is always skew-Hamiltonian with `det Y = (det X)^2`.
pub fn associated_skew_hamiltonian<T: Scalar>(x: &Matrix2n<T>) -> Matrix2n<T> {
    Matrix2n::wrap(assoc_dense(x.as_dmatrix()))
}

/// `Y' = -X^T J X J`, the associated matrix of `X^T`.
pub fn associated_skew_hamiltonian_left<T: Scalar>(x: &Matrix2n<T>) -> Matrix2n<T> {
    associated_skew_hamiltonian(&x.transpose())
}

/// Inverse of a symplectic matrix: `S^{-1} = -J S^T J`.
pub(crate) fn symplectic_inverse_dense<T: Scalar>(s: &DMatrix<T>) -> DMatrix<T> {
    -j_right(&j_left(&s.transpose()))
}

/// Inverse of a symplectic matrix via `S^{-1} = -J S^T J` (no linear solve).
pub fn symplectic_inverse<T: Scalar>(s: &Matrix2n<T>) -> Matrix2n<T> {
    Matrix2n::wrap(symplectic_inverse_dense(s.as_dmatrix()))
}
