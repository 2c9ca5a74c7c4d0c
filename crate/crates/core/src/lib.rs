//! Polar-type factorizations of even-dimensional real matrices into factors
//! with symplectic structure, and their use in reducing bosonic Gaussian channel triples
//! `(K, l, alpha)` to canonical forms.
//!
//! All routines are generic over the real scalar type (see [`Scalar`]); the
//! aliases below fix it to `f64` or `f32`.

pub mod channel;
pub mod error;
pub mod matfun;
pub mod matrix;
pub mod polar;
pub mod random;
pub mod roots;
pub mod scalar;
pub mod symplectic;

pub use channel::{
    classify_channel, compose, normal_form, parameter_counts, validate_channel, williamson, AffineSymplectic,
    CanonicalCase, CaseRequest, ChannelClassification, ChannelNormalForm, ChannelValidity, GaussianChannelTriple,
    ParameterCounts, WilliamsonForm,
};
pub use error::{Error, Precondition, Result, SpectrumSign};
pub use matfun::{classify_real_eigenvalues, classify_skew_hamiltonian_eigenvalues, Block, principal_sqrt_real, real_schur, EigenClassification, RealSchurForm};
pub use matrix::{Matrix2n, Vector2n};
pub use polar::{decompose, verify, Factor, Factorization, Variant, VerifyReport};
pub use roots::{
    hamiltonian_sqrt, skew_hamiltonian_principal_sqrt, skew_hamiltonian_principal_sqrt_projected,
    symmetric_pair_factorization, symplectic_block_diagonalize, SymplecticBlockDiagonalization,
};
pub use scalar::Scalar;
pub use symplectic::{
    associated_skew_hamiltonian, associated_skew_hamiltonian_left, check_structure, signature_matrix,
    swap_matrix, symplectic_form, symplectic_inverse, StructureCheck, StructureKind, TolerancePolicy,
};

pub type Matrix64 = Matrix2n<f64>;
pub type Vector64 = Vector2n<f64>;
pub type Matrix32 = Matrix2n<f32>;
pub type Vector32 = Vector2n<f32>;
pub type Factorization64 = Factorization<f64>;
pub type Channel64 = GaussianChannelTriple<f64>;
pub type NormalForm64 = ChannelNormalForm<f64>;
pub type Williamson64 = WilliamsonForm<f64>;
