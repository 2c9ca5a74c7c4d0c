use std::fmt;

use thiserror::Error;

/// Errors produced by the decomposition and channel routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("real Schur reduction did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(Precondition),
    #[error("defective eigenstructure: {0} (only eigen-generic inputs are supported)")]
    DefectiveEigenstructure(String),
    #[error("matrix is derogatory: no Krylov seed produced a full-rank basis")]
    DerogatoryInput,
    #[error("alpha is not symmetric (residual {residual:e})")]
    AsymmetricAlpha { residual: f64 },
    #[error("post-condition check failed: {0}")]
    VerificationFailed(String),
}

/// Sign class of an offending real eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSign {
    /// Zero or negative real eigenvalues are present.
    NonPositive,
    /// Zero or positive real eigenvalues are present.
    NonNegative,
}

impl fmt::Display for SpectrumSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumSign::NonPositive => f.write_str("zero or negative"),
            SpectrumSign::NonNegative => f.write_str("zero or positive"),
        }
    }
}

/// Which precondition failed, with the data that made it fail.
#[derive(Debug, Clone, PartialEq)]
pub enum Precondition {
    /// The matrix is numerically singular.
    Degenerate { smallest_singular_value: f64, largest_singular_value: f64 },
    /// Principal square root requested for a spectrum touching the closed negative axis.
    NegativeOrZeroRealEigenvalue { eigenvalues: Vec<f64> },
    /// A polar variant's eigenvalue-sign condition failed.
    SpectrumSign { variant: String, forbidden: SpectrumSign, eigenvalues: Vec<f64> },
    NotSkewHamiltonian { residual: f64 },
    NotPositiveDefinite { min_eigenvalue: f64 },
    /// A channel normal form was requested for a case the spectrum of -K^T J K J excludes.
    CaseInadmissible { case: String, forbidden: SpectrumSign, eigenvalues: Vec<f64> },
}

fn list(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precondition::Degenerate { smallest_singular_value, largest_singular_value } => write!(
                f,
                "matrix is degenerate (smallest singular value {smallest_singular_value:e}, largest {largest_singular_value:e})"
            ),
            Precondition::NegativeOrZeroRealEigenvalue { eigenvalues } => write!(
                f,
                "matrix has zero or negative real eigenvalues {}; the principal square root does not exist",
                list(eigenvalues)
            ),
            Precondition::SpectrumSign { variant, forbidden, eigenvalues } => write!(
                f,
                "variant {variant} requires no {forbidden} real eigenvalues, found {}",
                list(eigenvalues)
            ),
            Precondition::NotSkewHamiltonian { residual } => {
                write!(f, "matrix is not skew-Hamiltonian (residual {residual:e})")
            }
            Precondition::NotPositiveDefinite { min_eigenvalue } => {
                write!(f, "matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")
            }
            Precondition::CaseInadmissible { case, forbidden, eigenvalues } => write!(
                f,
                "case {case} requires -K^T J K J to have no {forbidden} real eigenvalues, found {}",
                list(eigenvalues)
            ),
        }
    }
}

impl From<Precondition> for Error {
    fn from(p: Precondition) -> Self {
        Error::PreconditionViolated(p)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
