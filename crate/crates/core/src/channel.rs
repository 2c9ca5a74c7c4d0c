//! Bosonic Gaussian channels as matrix triples `(K, l, alpha)`.
//!
//! A triple is a channel when `alpha` is symmetric and the Hermitian matrix
//! `alpha - (i/2)(J - K^T J K)` is positive semidefinite. Channels compose as
//!
//! ```text
//! (K2, l2, a2) (K1, l1, a1) = (K1 K2, K2^T l1 + l2, K2^T a1 K2 + a2)
//! ```
//!
//! with identity `(I, 0, 0)`. Triples `(S, h, 0)` with `S` symplectic are the
//! inhomogeneous symplectic transformations; [`normal_form`] uses them on both
//! sides to bring a channel with `det K != 0` to `(D R, 0, L)`, `(A, 0, L)` or
//! `(D A, 0, L)` with `L` diagonal.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Precondition, Result, SpectrumSign};
use crate::matfun::{classify_eigenvalues, skew_hamiltonian_eigenvalues, real_schur_dense, EigenClassification};
use crate::matrix::{check_modes, singular_extremes, Matrix2n, Vector2n};
use crate::polar::{decompose, Variant};
use crate::scalar::{lit, to_f64, Scalar};
use crate::symplectic::{
    assoc_dense, d_dense, j_dense, j_left, structure_residual_dense, symplectic_inverse_dense,
    StructureKind, TolerancePolicy,
};

/// `(K, l, alpha)` with `alpha` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianChannelTriple<T: Scalar> {
    pub k: Matrix2n<T>,
    pub l: Vector2n<T>,
    pub alpha: Matrix2n<T>,
}

impl<T: Scalar> GaussianChannelTriple<T> {
    /// Checks that all three parts share the mode count. Validity is checked
    /// separately by [`validate_channel`].
    pub fn new(k: Matrix2n<T>, l: Vector2n<T>, alpha: Matrix2n<T>) -> Result<Self> {
        if l.n() != k.n() {
            return Err(Error::DimensionMismatch { expected: k.dim(), found: 2 * l.n() });
        }
        if alpha.n() != k.n() {
            return Err(Error::DimensionMismatch { expected: k.dim(), found: alpha.dim() });
        }
        Ok(Self { k, l, alpha })
    }

    /// The identity channel `(I, 0, 0)`.
    pub fn identity(n: usize) -> Result<Self> {
        Ok(Self { k: Matrix2n::identity(n)?, l: Vector2n::zeros(n)?, alpha: Matrix2n::zeros(n)? })
    }

    /// The inhomogeneous symplectic transformation `(S, h, 0)`.
    pub fn affine(s: Matrix2n<T>, h: Vector2n<T>) -> Result<Self> {
        let n = s.n();
        Self::new(s, h, Matrix2n::zeros(n)?)
    }

    pub fn n(&self) -> usize {
        self.k.n()
    }

    /// Largest entrywise difference over all three parts.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        let dl = (self.l.as_dvector() - other.l.as_dvector()).amax();
        self.k.max_abs_diff(&other.k).max(dl).max(self.alpha.max_abs_diff(&other.alpha))
    }
}

/// `(S, h)` acting as the channel `(S, h, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSymplectic<T: Scalar> {
    pub s: Matrix2n<T>,
    pub h: Vector2n<T>,
}

impl<T: Scalar> AffineSymplectic<T> {
    pub fn as_channel(&self) -> GaussianChannelTriple<T> {
        GaussianChannelTriple {
            k: self.s.clone(),
            l: self.h.clone(),
            alpha: Matrix2n::wrap(DMatrix::zeros(self.s.dim(), self.s.dim())),
        }
    }
}

/// Output of [`validate_channel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelValidity<T> {
    pub valid: bool,
    /// Smallest eigenvalue of `alpha - (i/2)(J - K^T J K)`.
    pub min_eigenvalue: T,
}

/// Smallest eigenvalue of the Hermitian `alpha - (i/2)(J - K^T J K)`, through
/// its real symmetric embedding `[[A, -B], [B, A]]` (each eigenvalue doubled).
pub(crate) fn validity_margin_dense<T: Scalar>(alpha: &DMatrix<T>, k: &DMatrix<T>) -> T {
    let d = alpha.nrows();
    let n = d / 2;
    let half = lit::<T>(0.5);
    let a = (alpha + alpha.transpose()) * half;
    // Imaginary part: -(1/2)(J - K^T J K), a real skew-symmetric matrix.
    let b = -(j_dense::<T>(n) - k.transpose() * j_left(k)) * half;
    let b = (&b - b.transpose()) * half;
    let mut emb = DMatrix::zeros(2 * d, 2 * d);
    emb.view_mut((0, 0), (d, d)).copy_from(&a);
    emb.view_mut((d, d), (d, d)).copy_from(&a);
    emb.view_mut((0, d), (d, d)).copy_from(&-&b);
    emb.view_mut((d, 0), (d, d)).copy_from(&b);
    SymmetricEigen::new(emb).eigenvalues.min()
}

fn ensure_symmetric<T: Scalar>(alpha: &Matrix2n<T>, tol: &TolerancePolicy) -> Result<()> {
    let residual = structure_residual_dense(alpha.as_dmatrix(), StructureKind::Symmetric);
    if !tol.accepts(residual, alpha.norm_fro()) {
        return Err(Error::AsymmetricAlpha { residual: to_f64(residual) });
    }
    Ok(())
}

/// Checks the channel condition. Valid when the smallest eigenvalue is at least
/// `-rel_tol * (1 + ||alpha||_F + ||K||_F^2)`.
pub fn validate_channel<T: Scalar>(c: &GaussianChannelTriple<T>, tol: &TolerancePolicy) -> Result<ChannelValidity<T>> {
    if c.k.n() != c.alpha.n() || c.l.n() != c.k.n() {
        return Err(Error::DimensionMismatch { expected: c.k.dim(), found: c.alpha.dim() });
    }
    ensure_symmetric(&c.alpha, tol)?;
    let min_eigenvalue = validity_margin_dense(c.alpha.as_dmatrix(), c.k.as_dmatrix());
    let kn = c.k.norm_fro();
    let bound = lit::<T>(tol.rel_tol) * (T::one() + c.alpha.norm_fro() + kn * kn);
    Ok(ChannelValidity { valid: min_eigenvalue >= -bound, min_eigenvalue })
}

/// The channel product `c2 c1 = (K1 K2, K2^T l1 + l2, K2^T alpha1 K2 + alpha2)`.
pub fn compose<T: Scalar>(c2: &GaussianChannelTriple<T>, c1: &GaussianChannelTriple<T>) -> Result<GaussianChannelTriple<T>> {
    if c1.n() != c2.n() {
        return Err(Error::DimensionMismatch { expected: c2.k.dim(), found: c1.k.dim() });
    }
    let k1 = c1.k.as_dmatrix();
    let k2 = c2.k.as_dmatrix();
    let k2t = k2.transpose();
    let k = k1 * k2;
    let l = &k2t * c1.l.as_dvector() + c2.l.as_dvector();
    let alpha = &k2t * c1.alpha.as_dmatrix() * k2 + c2.alpha.as_dmatrix();
    Ok(GaussianChannelTriple { k: Matrix2n::wrap(k), l: Vector2n::wrap(l), alpha: Matrix2n::wrap(alpha) })
}

/// `S^T alpha S = diag(nu, nu)` with `S` symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct WilliamsonForm<T: Scalar> {
    pub s: Matrix2n<T>,
    pub lambda: Matrix2n<T>,
    /// Symplectic eigenvalues, descending.
    pub nu: Vec<T>,
}

fn is_diagonal<T: Scalar>(m: &DMatrix<T>) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| i == j || m[(i, j)] == T::zero()))
}

fn lambda_from<T: Scalar>(nu: &[T]) -> Matrix2n<T> {
    let n = nu.len();
    let mut diag = DVector::zeros(2 * n);
    for (i, &v) in nu.iter().enumerate() {
        diag[i] = v;
        diag[n + i] = v;
    }
    Matrix2n::wrap(DMatrix::from_diagonal(&diag))
}

/// Per-mode rescaling of a positive diagonal `alpha`, modes permuted so that
/// `nu` is descending.
fn williamson_diagonal<T: Scalar>(alpha: &DMatrix<T>) -> WilliamsonForm<T> {
    let n = alpha.nrows() / 2;
    let quarter = lit::<T>(0.25);
    let mut modes: Vec<(usize, T)> = (0..n).map(|i| (i, (alpha[(i, i)] * alpha[(n + i, n + i)]).sqrt())).collect();
    modes.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for (j, &(src, _)) in modes.iter().enumerate() {
        let (a, b) = (alpha[(src, src)], alpha[(n + src, n + src)]);
        s[(src, j)] = (b / a).powf(quarter);
        s[(n + src, n + j)] = (a / b).powf(quarter);
    }
    let nu: Vec<T> = modes.iter().map(|m| m.1).collect();
    WilliamsonForm { s: Matrix2n::wrap(s), lambda: lambda_from(&nu), nu }
}

/// Williamson normal form of a symmetric positive definite `alpha`.
///
/// With `W = alpha^{1/2} J alpha^{1/2}` (skew-symmetric), an orthogonal `O`
/// pairs each unit `x` in an eigenspace of `W^T W` with `y = W x / nu`, giving
/// `O^T W O = diag(nu, nu) J`; then `S = alpha^{-1/2} O diag(nu, nu)^{1/2}`.
/// The result is checked before it is returned.
pub fn williamson<T: Scalar>(alpha: &Matrix2n<T>, tol: &TolerancePolicy) -> Result<WilliamsonForm<T>> {
    ensure_symmetric(alpha, tol)?;
    let n = alpha.n();
    let d = 2 * n;
    let half = lit::<T>(0.5);
    let am = (alpha.as_dmatrix() + alpha.as_dmatrix().transpose()) * half;
    let eig = SymmetricEigen::new(am.clone());
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if hi <= T::zero() || lo <= lit::<T>(tol.rel_tol) * hi {
        return Err(Precondition::NotPositiveDefinite { min_eigenvalue: to_f64(lo) }.into());
    }

    let form = if is_diagonal(&am) {
        williamson_diagonal(&am)
    } else {
        let v = &eig.eigenvectors;
        let sqrt = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| x.sqrt())) * v.transpose();
        let inv_sqrt = v * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| T::one() / x.sqrt())) * v.transpose();
        let w = &sqrt * j_left(&sqrt);
        let w = (&w - w.transpose()) * half;
        let wtw = w.transpose() * &w;
        let wtw = (&wtw + wtw.transpose()) * half;
        let e2 = SymmetricEigen::new(wtw);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| e2.eigenvalues[b].partial_cmp(&e2.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));

        let mut xs: Vec<DVector<T>> = Vec::with_capacity(n);
        let mut ys: Vec<DVector<T>> = Vec::with_capacity(n);
        let mut nu: Vec<T> = Vec::with_capacity(n);
        for &idx in &order {
            if xs.len() == n {
                break;
            }
            let mut x: DVector<T> = e2.eigenvectors.column(idx).clone_owned();
            for _ in 0..2 {
                for q in xs.iter().chain(ys.iter()) {
                    let c = q.dot(&x);
                    x -= q * c;
                }
            }
            let nx = x.norm();
            if nx < half {
                continue;
            }
            x /= nx;
            let wx = &w * &x;
            let val = wx.norm();
            if val <= T::zero() {
                return Err(Error::VerificationFailed("zero symplectic eigenvalue".into()));
            }
            ys.push(wx / val);
            xs.push(x);
            nu.push(val);
        }
        if xs.len() != n {
            return Err(Error::VerificationFailed("could not pair the eigenvectors of W^T W".into()));
        }
        let mut o = DMatrix::zeros(d, d);
        for i in 0..n {
            o.set_column(i, &xs[i]);
            o.set_column(n + i, &ys[i]);
        }
        let mut root_lambda = DVector::zeros(d);
        for i in 0..n {
            root_lambda[i] = nu[i].sqrt();
            root_lambda[n + i] = nu[i].sqrt();
        }
        let s = inv_sqrt * o * DMatrix::from_diagonal(&root_lambda);
        WilliamsonForm { s: Matrix2n::wrap(s), lambda: lambda_from(&nu), nu }
    };

    let s = form.s.as_dmatrix();
    let sym_res = structure_residual_dense(s, StructureKind::Symplectic);
    let diag_res = (s.transpose() * &am * s - form.lambda.as_dmatrix()).norm();
    let sn = s.norm();
    let bound = lit::<T>(tol.rel_tol) * (T::one() + sn * sn * (T::one() + am.norm()));
    if sym_res > bound || diag_res > bound {
        return Err(Error::VerificationFailed(format!(
            "Williamson form residuals: symplectic {:.3e}, diagonal {:.3e}",
            to_f64(sym_res),
            to_f64(diag_res)
        )));
    }
    Ok(form)
}

/// The three canonical forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CanonicalCase {
    /// `K = D R`, `R` symmetric.
    DRForm,
    /// `K = A`, `A` skew-symmetric.
    AForm,
    /// `K = D A`, `A` skew-symmetric.
    DAForm,
}

impl CanonicalCase {
    pub const ALL: [CanonicalCase; 3] = [CanonicalCase::DRForm, CanonicalCase::AForm, CanonicalCase::DAForm];

    pub fn name(self) -> &'static str {
        match self {
            CanonicalCase::DRForm => "DRForm",
            CanonicalCase::AForm => "AForm",
            CanonicalCase::DAForm => "DAForm",
        }
    }

    /// Polar variant applied to `K S2`.
    pub fn variant(self) -> Variant {
        match self {
            CanonicalCase::DRForm => Variant::SDR,
            CanonicalCase::AForm => Variant::SA,
            CanonicalCase::DAForm => Variant::SDA,
        }
    }

    /// Structure of the core factor (`R` or `A`).
    pub fn core_kind(self) -> StructureKind {
        match self {
            CanonicalCase::DRForm => StructureKind::Symmetric,
            _ => StructureKind::SkewSymmetric,
        }
    }
}

impl fmt::Display for CanonicalCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonicalCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        match key.as_str() {
            "drform" | "dr" => Ok(CanonicalCase::DRForm),
            "aform" | "a" => Ok(CanonicalCase::AForm),
            "daform" | "da" => Ok(CanonicalCase::DAForm),
            _ => Err(Error::InvalidDimension(format!("unknown canonical case '{s}'"))),
        }
    }
}

/// Requested case for [`normal_form`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseRequest {
    /// First admissible of `AForm`, `DAForm`, `DRForm`.
    Auto,
    Case(CanonicalCase),
}

/// Output of [`classify_channel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelClassification {
    /// Classification of `-K^T J K J`.
    pub classification: EigenClassification,
    pub determinant: f64,
    pub nondegenerate: bool,
    pub admissible: Vec<CanonicalCase>,
}

impl ChannelClassification {
    /// The case [`CaseRequest::Auto`] resolves to.
    pub fn auto_case(&self) -> Option<CanonicalCase> {
        [CanonicalCase::AForm, CanonicalCase::DAForm, CanonicalCase::DRForm]
            .into_iter()
            .find(|c| self.admissible.contains(c))
    }

    /// One-mode class in Holevo's classification: `B)-C)` for `det K > 0`,
    /// `D)` for `det K < 0`.
    pub fn one_mode_class(&self, n: usize) -> Option<&'static str> {
        if n != 1 || !self.nondegenerate {
            return None;
        }
        Some(if self.determinant > 0.0 { "B)-C)" } else { "D)" })
    }
}

/// Determines which canonical forms apply to a channel with matrix `K`.
///
/// `DRForm` needs only `det K != 0`; `AForm` additionally needs no real
/// eigenvalue `<= 0` in `-K^T J K J`, `DAForm` none `>= 0`.
pub fn classify_channel<T: Scalar>(k: &Matrix2n<T>, tol: &TolerancePolicy) -> Result<ChannelClassification> {
    let km = k.as_dmatrix();
    let y = assoc_dense(&km.transpose());
    let (_, t) = real_schur_dense(&y)?;
    let classification = classify_eigenvalues(&skew_hamiltonian_eigenvalues(&t), tol);
    let (lo, hi) = singular_extremes(km);
    let nondegenerate = hi > T::zero() && lo > lit::<T>(tol.rel_tol) * hi;
    let mut admissible = Vec::new();
    if nondegenerate {
        admissible.push(CanonicalCase::DRForm);
        if !classification.has_zero && !classification.has_negative_real {
            admissible.push(CanonicalCase::AForm);
        }
        if !classification.has_zero && !classification.has_positive_real {
            admissible.push(CanonicalCase::DAForm);
        }
    }
    Ok(ChannelClassification {
        classification,
        determinant: to_f64(k.determinant()),
        nondegenerate,
        admissible,
    })
}

/// A canonical form together with the transformations that produce it:
/// `left . channel . right = canonical` under [`compose`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelNormalForm<T: Scalar> {
    pub case: CanonicalCase,
    /// `(S2, h2)`, applied on the left.
    pub left: AffineSymplectic<T>,
    /// `(S1, h1)`, applied on the right.
    pub right: AffineSymplectic<T>,
    /// `(D R | A | D A, 0, Lambda)`.
    pub canonical: GaussianChannelTriple<T>,
    /// `R` or `A`.
    pub core_factor: Matrix2n<T>,
    /// Symplectic eigenvalues when the Williamson step ran.
    pub nu: Option<Vec<T>>,
    /// Largest of the relative mismatches of `K`, `l` and `alpha` between the
    /// composed product and `canonical`.
    pub reconstruction_residual: T,
}

/// Relative mismatch used for [`ChannelNormalForm::reconstruction_residual`].
pub fn triple_mismatch<T: Scalar>(a: &GaussianChannelTriple<T>, b: &GaussianChannelTriple<T>) -> T {
    let rel = |x: T, scale: T| x / (T::one() + scale);
    let dk = rel((a.k.as_dmatrix() - b.k.as_dmatrix()).norm(), b.k.norm_fro());
    let dl = rel((a.l.as_dvector() - b.l.as_dvector()).norm(), a.l.norm());
    let da = rel((a.alpha.as_dmatrix() - b.alpha.as_dmatrix()).norm(), b.alpha.norm_fro());
    dk.max(dl).max(da)
}

fn resolve_case(class: &ChannelClassification, request: CaseRequest) -> Result<CanonicalCase> {
    let case = match request {
        CaseRequest::Auto => class.auto_case(),
        CaseRequest::Case(c) => Some(c),
    };
    let Some(case) = case else {
        return Err(Error::InvalidDimension("no canonical case admissible".into()));
    };
    if class.admissible.contains(&case) {
        return Ok(case);
    }
    let (forbidden, eigenvalues) = match case {
        CanonicalCase::AForm => (SpectrumSign::NonPositive, class.classification.non_positive()),
        CanonicalCase::DAForm => (SpectrumSign::NonNegative, class.classification.non_negative()),
        CanonicalCase::DRForm => unreachable!("DRForm is admissible whenever K is nondegenerate"),
    };
    Err(Precondition::CaseInadmissible { case: case.name().to_string(), forbidden, eigenvalues }.into())
}

/// Brings a channel with nondegenerate `K` to canonical form.
///
/// The translation is removed on the right with `h1 = -K^{-T} l`, `h2 = 0`.
/// `alpha` is brought to Williamson form by `S2` (skipped when `alpha = 0`,
/// and for a diagonal `alpha` that is not positive definite). Then `K S2` is
/// decomposed with `SDR`, `SA` or `SDA` and `S1` is the inverse of its
/// symplectic factor.
pub fn normal_form<T: Scalar>(
    c: &GaussianChannelTriple<T>,
    request: CaseRequest,
    tol: &TolerancePolicy,
) -> Result<ChannelNormalForm<T>> {
    let n = c.n();
    check_modes(n)?;
    ensure_symmetric(&c.alpha, tol)?;
    let km = c.k.as_dmatrix();
    let class = classify_channel(&c.k, tol)?;
    if !class.nondegenerate {
        let (lo, hi) = singular_extremes(km);
        return Err(Precondition::Degenerate {
            smallest_singular_value: to_f64(lo),
            largest_singular_value: to_f64(hi),
        }
        .into());
    }
    let case = resolve_case(&class, request)?;

    let alpha = c.alpha.as_dmatrix();
    let (s2, lambda, nu) = if alpha.iter().all(|&x| x == T::zero()) {
        (DMatrix::identity(2 * n, 2 * n), DMatrix::zeros(2 * n, 2 * n), None)
    } else {
        match williamson(&c.alpha, tol) {
            Ok(w) => (w.s.into_inner(), w.lambda.into_inner(), Some(w.nu)),
            Err(Error::PreconditionViolated(Precondition::NotPositiveDefinite { .. })) if is_diagonal(alpha) => {
                (DMatrix::identity(2 * n, 2 * n), alpha.clone(), None)
            }
            Err(e) => return Err(e),
        }
    };

    let x = Matrix2n::wrap(km * &s2);
    let f = decompose(&x, case.variant(), tol)?;
    let s = f.factors[0].matrix.as_dmatrix();
    let core = f.factors[1].matrix.clone();
    let canonical_k = match case {
        CanonicalCase::AForm => core.as_dmatrix().clone(),
        _ => d_dense::<T>(n) * core.as_dmatrix(),
    };
    let s1 = symplectic_inverse_dense(s);

    let h1 = km
        .transpose()
        .lu()
        .solve(c.l.as_dvector())
        .map(|v| -v)
        .ok_or_else(|| Error::VerificationFailed("K^T is singular".into()))?;
    let right = AffineSymplectic { s: Matrix2n::wrap(s1), h: Vector2n::wrap(h1) };
    let left = AffineSymplectic { s: Matrix2n::wrap(s2), h: Vector2n::zeros(n)? };
    let canonical = GaussianChannelTriple {
        k: Matrix2n::wrap(canonical_k),
        l: Vector2n::zeros(n)?,
        alpha: Matrix2n::wrap(lambda),
    };
    let composed = compose(&left.as_channel(), &compose(c, &right.as_channel())?)?;
    let reconstruction_residual = triple_mismatch(&composed, &canonical);
    Ok(ChannelNormalForm { case, left, right, canonical, core_factor: core, nu, reconstruction_residual })
}

/// Dimension bookkeeping for `2n x 2n` real matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterCounts {
    pub general: usize,
    pub symplectic: usize,
    pub canonical_core: usize,
    pub skew_symmetric: usize,
    pub symmetric: usize,
}

/// `4n^2`, `n(2n+1)`, `n(2n-1)`, `n(2n-1)`, `n(2n+1)`.
pub fn parameter_counts(n: usize) -> Result<ParameterCounts> {
    check_modes(n)?;
    Ok(ParameterCounts {
        general: 4 * n * n,
        symplectic: n * (2 * n + 1),
        canonical_core: 4 * n * n - n * (2 * n + 1),
        skew_symmetric: n * (2 * n - 1),
        symmetric: n * (2 * n + 1),
    })
}
