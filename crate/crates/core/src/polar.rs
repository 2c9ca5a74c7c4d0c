//! Polar-type factorizations with Hamiltonian, skew-Hamiltonian, symplectic and anti-symplectic factors.
//!
//! Every variant writes a nondegenerate `X` as a product of two structured
//! factors, with the fixed involution `D = diag(I, -I)` between them where the
//! variant name contains a `D`:
//!
//! | variant | product   | factors                          | condition on the spectrum       |
//! |---------|-----------|----------------------------------|---------------------------------|
//! | `HT`    | `H T`     | Hamiltonian, anti-symplectic     | none (eigen-generic `Y`)        |
//! | `TH`    | `T H`     | anti-symplectic, Hamiltonian     | none (eigen-generic `Y'`)       |
//! | `RDS`   | `R D S`   | symmetric, symplectic            | none (eigen-generic `Y`)        |
//! | `SDR`   | `S D R`   | symplectic, symmetric            | none (eigen-generic `Y'`)       |
//! | `MS`    | `M S`     | skew-Hamiltonian, symplectic     | `Y` no real eigenvalue `<= 0`   |
//! | `AS`    | `A S`     | skew-symmetric, symplectic       | `Y` no real eigenvalue `<= 0`   |
//! | `MDS`   | `M D S`   | skew-Hamiltonian, symplectic     | `Y` no real eigenvalue `>= 0`   |
//! | `ADS`   | `A D S`   | skew-symmetric, symplectic       | `Y` no real eigenvalue `>= 0`   |
//! | `SM`    | `S M`     | symplectic, skew-Hamiltonian     | `Y'` no real eigenvalue `<= 0`  |
//! | `SA`    | `S A`     | symplectic, skew-symmetric       | `Y'` no real eigenvalue `<= 0`  |
//! | `SDM`   | `S D M`   | symplectic, skew-Hamiltonian     | `Y'` no real eigenvalue `>= 0`  |
//! | `SDA`   | `S D A`   | symplectic, skew-symmetric       | `Y'` no real eigenvalue `>= 0`  |
//!
//! Here `Y = -X J X^T J` and `Y' = -X^T J X J`. The `MS` family uses the
//! principal square root of `Y`; the `HT` family uses a Hamiltonian square root
//! and therefore accepts negative real eigenvalues.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Precondition, Result, SpectrumSign};
use crate::matfun::{classify_eigenvalues, skew_hamiltonian_eigenvalues, real_schur_dense};
use crate::matrix::Matrix2n;
use crate::roots::{ensure_nondegenerate, hamiltonian_sqrt, skew_hamiltonian_principal_sqrt_projected};
use crate::scalar::{to_f64, Scalar};
use crate::symplectic::{
    assoc_dense, d_dense, j_right, structure_residual_dense, z_dense, StructureKind, TolerancePolicy,
};

/// The twelve decomposition variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    HT,
    TH,
    RDS,
    SDR,
    MS,
    AS,
    MDS,
    ADS,
    SM,
    SA,
    SDM,
    SDA,
}

impl Variant {
    pub const ALL: [Variant; 12] = [
        Variant::HT,
        Variant::TH,
        Variant::RDS,
        Variant::SDR,
        Variant::MS,
        Variant::AS,
        Variant::MDS,
        Variant::ADS,
        Variant::SM,
        Variant::SA,
        Variant::SDM,
        Variant::SDA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::HT => "HT",
            Variant::TH => "TH",
            Variant::RDS => "RDS",
            Variant::SDR => "SDR",
            Variant::MS => "MS",
            Variant::AS => "AS",
            Variant::MDS => "MDS",
            Variant::ADS => "ADS",
            Variant::SM => "SM",
            Variant::SA => "SA",
            Variant::SDM => "SDM",
            Variant::SDA => "SDA",
        }
    }

    /// Declared structure of the two factors, left to right.
    pub fn factor_kinds(self) -> [StructureKind; 2] {
        use StructureKind::*;
        match self {
            Variant::HT => [Hamiltonian, AntiSymplectic],
            Variant::TH => [AntiSymplectic, Hamiltonian],
            Variant::RDS => [Symmetric, Symplectic],
            Variant::SDR => [Symplectic, Symmetric],
            Variant::MS | Variant::MDS => [SkewHamiltonian, Symplectic],
            Variant::AS | Variant::ADS => [SkewSymmetric, Symplectic],
            Variant::SM | Variant::SDM => [Symplectic, SkewHamiltonian],
            Variant::SA | Variant::SDA => [Symplectic, SkewSymmetric],
        }
    }

    /// Whether `D` sits between the two factors.
    pub fn has_d(self) -> bool {
        matches!(self, Variant::RDS | Variant::SDR | Variant::MDS | Variant::ADS | Variant::SDM | Variant::SDA)
    }

    /// Variants computed by decomposing `X^T` with the returned variant.
    fn transposed_base(self) -> Option<Variant> {
        match self {
            Variant::TH => Some(Variant::HT),
            Variant::SDR => Some(Variant::RDS),
            Variant::SM => Some(Variant::MS),
            Variant::SA => Some(Variant::AS),
            Variant::SDM => Some(Variant::MDS),
            Variant::SDA => Some(Variant::ADS),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let up = s.to_ascii_uppercase();
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == up)
            .ok_or_else(|| Error::InvalidDimension(format!("unknown variant '{s}'")))
    }
}

/// One factor with its declared structure and the Frobenius norm of the
/// structure's defining residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor<T: Scalar> {
    pub kind: StructureKind,
    pub matrix: Matrix2n<T>,
    pub residual: T,
}

/// Result of [`decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization<T: Scalar> {
    pub variant: Variant,
    /// Left-to-right factors; `D` is implied between them when `variant.has_d()`.
    pub factors: Vec<Factor<T>>,
    /// `||product - X||_F / (1 + ||X||_F)`.
    pub reconstruction_residual: T,
}

impl<T: Scalar> Factorization<T> {
    /// Builds a factorization from raw factor matrices, computing residuals against `x`.
    pub fn from_factors(x: &Matrix2n<T>, variant: Variant, matrices: Vec<Matrix2n<T>>) -> Result<Self> {
        if matrices.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: matrices.len() });
        }
        for m in &matrices {
            if m.dim() != x.dim() {
                return Err(Error::DimensionMismatch { expected: x.dim(), found: m.dim() });
            }
        }
        let kinds = variant.factor_kinds();
        let factors: Vec<Factor<T>> = matrices
            .into_iter()
            .zip(kinds)
            .map(|(matrix, kind)| {
                let residual = structure_residual_dense(matrix.as_dmatrix(), kind);
                Factor { kind, matrix, residual }
            })
            .collect();
        let mut f = Factorization { variant, factors, reconstruction_residual: T::zero() };
        f.reconstruction_residual = reconstruction_error(x, &f.product()) / (T::one() + x.norm_fro());
        Ok(f)
    }

    /// The product of the factors, with `D` inserted where the variant prescribes.
    pub fn product(&self) -> Matrix2n<T> {
        let a = self.factors[0].matrix.as_dmatrix();
        let b = self.factors[1].matrix.as_dmatrix();
        let p = if self.variant.has_d() { a * d_dense::<T>(a.nrows() / 2) * b } else { a * b };
        Matrix2n::wrap(p)
    }

    pub fn matrices(&self) -> Vec<&Matrix2n<T>> {
        self.factors.iter().map(|f| &f.matrix).collect()
    }
}

fn reconstruction_error<T: Scalar>(x: &Matrix2n<T>, product: &Matrix2n<T>) -> T {
    (product.as_dmatrix() - x.as_dmatrix()).norm()
}

/// Residual report from [`verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<T> {
    pub ok: bool,
    /// `(kind, residual, holds)` per factor.
    pub structure: Vec<(StructureKind, T, bool)>,
    /// `||product - X||_F / (1 + ||X||_F)`.
    pub reconstruction_residual: T,
    /// Reconstruction is accepted when
    /// `||product - X||_F <= rel_tol * (1 + ||F_1||_F ||F_2||_F)`.
    pub reconstruction_ok: bool,
}

/// Recomputes every residual of `f` from its matrices; stored residuals are ignored.
pub fn verify<T: Scalar>(x: &Matrix2n<T>, f: &Factorization<T>, tol: &TolerancePolicy) -> Result<VerifyReport<T>> {
    if f.factors.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.factors.len() });
    }
    for fac in &f.factors {
        if fac.matrix.dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), found: fac.matrix.dim() });
        }
    }
    let kinds = f.variant.factor_kinds();
    let structure: Vec<(StructureKind, T, bool)> = f
        .factors
        .iter()
        .zip(kinds)
        .map(|(fac, kind)| {
            let r = structure_residual_dense(fac.matrix.as_dmatrix(), kind);
            (kind, r, tol.accepts(r, fac.matrix.norm_fro()))
        })
        .collect();
    let err = reconstruction_error(x, &f.product());
    let scale = T::one() + f.factors[0].matrix.norm_fro() * f.factors[1].matrix.norm_fro();
    let reconstruction_ok = err <= crate::scalar::lit::<T>(tol.rel_tol) * scale;
    let ok = reconstruction_ok && structure.iter().all(|s| s.2);
    Ok(VerifyReport {
        ok,
        structure,
        reconstruction_residual: err / (T::one() + x.norm_fro()),
        reconstruction_ok,
    })
}

fn solve_left<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::VerificationFailed("square-root factor is singular".into()))
}

/// Checks the eigenvalue-sign condition of `variant` on `Y = -X J X^T J`.
fn check_spectrum<T: Scalar>(
    y: &DMatrix<T>,
    forbidden: SpectrumSign,
    variant: Variant,
    tol: &TolerancePolicy,
) -> Result<()> {
    let (_, t) = real_schur_dense(y)?;
    let class = classify_eigenvalues(&skew_hamiltonian_eigenvalues(&t), tol);
    let (bad, offending) = match forbidden {
        SpectrumSign::NonPositive => (class.has_zero || class.has_negative_real, class.non_positive()),
        SpectrumSign::NonNegative => (class.has_zero || class.has_positive_real, class.non_negative()),
    };
    if bad {
        return Err(Precondition::SpectrumSign {
            variant: variant.name().to_string(),
            forbidden,
            eigenvalues: offending,
        }
        .into());
    }
    Ok(())
}

/// `X = M S` with `M` the principal square root of `Y`.
fn ms_factors<T: Scalar>(x: &DMatrix<T>, variant: Variant, tol: &TolerancePolicy) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let y = assoc_dense(x);
    check_spectrum(&y, SpectrumSign::NonPositive, variant, tol)?;
    let m = skew_hamiltonian_principal_sqrt_projected(&Matrix2n::wrap(y), tol)?.into_inner();
    let s = solve_left(&m, x)?;
    Ok((m, s))
}

/// `X = H T` with `H` a Hamiltonian square root of `Y`.
fn ht_factors<T: Scalar>(x: &DMatrix<T>, tol: &TolerancePolicy) -> Result<(DMatrix<T>, DMatrix<T>)> {
    ensure_nondegenerate(x, tol)?;
    let y = assoc_dense(x);
    let h = hamiltonian_sqrt(&Matrix2n::wrap(y), tol)?.into_inner();
    let t = solve_left(&h, x)?;
    Ok((h, t))
}

fn direct_factors<T: Scalar>(
    x: &DMatrix<T>,
    variant: Variant,
    tol: &TolerancePolicy,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let n = x.nrows() / 2;
    match variant {
        Variant::HT => ht_factors(x, tol),
        Variant::RDS => {
            // R = H J^{-1} = -H J, S = Z T.
            let (h, t) = ht_factors(x, tol)?;
            Ok((-j_right(&h), z_dense::<T>(n) * t))
        }
        Variant::MS => ms_factors(x, variant, tol),
        Variant::AS => {
            // A = -M J, companion symplectic factor J S.
            let (m, s) = ms_factors(x, variant, tol)?;
            Ok((-j_right(&m), crate::symplectic::j_left(&s)))
        }
        Variant::MDS | Variant::ADS => {
            // -(XD) J (XD)^T J = -Y, so XD falls under MS/AS; then S = D S1 D.
            let d = d_dense::<T>(n);
            let xd = x * &d;
            let base = if variant == Variant::MDS { Variant::MS } else { Variant::AS };
            let (a, s1) = direct_factors(&xd, base, tol).map_err(|e| reflect_error(e, variant))?;
            Ok((a, &d * s1 * &d))
        }
        _ => unreachable!("transposed variants are handled by decompose"),
    }
}

/// Rewrites a spectrum error raised on `X D` (whose `Y` is negated) in terms of
/// the caller's variant and the original spectrum.
fn reflect_error(e: Error, variant: Variant) -> Error {
    match e {
        Error::PreconditionViolated(Precondition::SpectrumSign { eigenvalues, .. }) => {
            let mut eig: Vec<f64> = eigenvalues.into_iter().map(|v| -v).collect();
            eig.sort_by(f64::total_cmp);
            Precondition::SpectrumSign {
                variant: variant.name().to_string(),
                forbidden: SpectrumSign::NonNegative,
                eigenvalues: eig,
            }
            .into()
        }
        other => other,
    }
}

fn rename_variant(e: Error, variant: Variant) -> Error {
    match e {
        Error::PreconditionViolated(Precondition::SpectrumSign { forbidden, eigenvalues, .. }) => {
            Precondition::SpectrumSign { variant: variant.name().to_string(), forbidden, eigenvalues }.into()
        }
        other => other,
    }
}

/// Decomposes `X` according to `variant`.
///
/// Factors are not unique for the `HT` family; the `MS` family uses the
/// principal root, which is. Residuals are reported in the result and can be
/// re-checked with [`verify`].
pub fn decompose<T: Scalar>(x: &Matrix2n<T>, variant: Variant, tol: &TolerancePolicy) -> Result<Factorization<T>> {
    let xm = x.as_dmatrix();
    let (a, b) = match variant.transposed_base() {
        Some(base) => {
            let (a, b) = direct_factors(&xm.transpose(), base, tol).map_err(|e| rename_variant(e, variant))?;
            (b.transpose(), a.transpose())
        }
        None => direct_factors(xm, variant, tol)?,
    };
    Factorization::from_factors(x, variant, vec![Matrix2n::wrap(a), Matrix2n::wrap(b)])
}

/// Whether every residual of a factorization is within `tol`.
pub fn within_tolerance<T: Scalar>(x: &Matrix2n<T>, f: &Factorization<T>, tol: &TolerancePolicy) -> bool {
    verify(x, f, tol).map(|r| r.ok).unwrap_or(false)
}

/// Largest structure residual of a factorization scaled by `1 + ||F||_F^2`.
pub fn scaled_structure_residual<T: Scalar>(f: &Factorization<T>) -> f64 {
    f.factors
        .iter()
        .map(|fac| {
            let nrm = to_f64(fac.matrix.norm_fro());
            to_f64(fac.residual) / (1.0 + nrm * nrm)
        })
        .fold(0.0, f64::max)
}
