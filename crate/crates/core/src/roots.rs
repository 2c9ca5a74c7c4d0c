//! Structure-preserving square roots of skew-Hamiltonian matrices.
//!
//! Two kinds of root are provided. The principal root of a skew-Hamiltonian
//! `Y` is again skew-Hamiltonian, but exists only when `Y` has no real
//! eigenvalues on the closed negative axis. A Hamiltonian root exists for every
//! nondegenerate `Y`; it is built here for eigen-generic inputs (each
//! eigenvalue of multiplicity exactly two with a two-dimensional eigenspace)
//! by bringing `Y` to `diag(N, N^T)` with a symplectic similarity and
//! factoring `N = P Q` into symmetric factors, so that `[[0, P], [Q, 0]]` is
//! a Hamiltonian root of the block-diagonal form.

use nalgebra::{Complex, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Precondition, Result};
use crate::matfun::{block_eigenvalues, principal_sqrt_dense, real_schur_dense};
use crate::matrix::{singular_extremes, Matrix2n};
use crate::scalar::{lit, to_f64, Scalar};
use crate::symplectic::{
    j_left, j_right, structure_residual_dense, symplectic_inverse_dense, StructureKind,
    TolerancePolicy,
};

/// `Y = S diag(N, N^T) S^{-1}` with `S` symplectic.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticBlockDiagonalization<T: Scalar> {
    pub s: Matrix2n<T>,
    /// The `n x n` block; block diagonal with one 1x1 block per real
    /// eigenvalue and one 2x2 block per complex-conjugate pair.
    pub n_block: DMatrix<T>,
    /// Sizes of the diagonal blocks of `n_block`, in order.
    pub block_sizes: Vec<usize>,
}

pub(crate) fn ensure_skew_hamiltonian<T: Scalar>(y: &DMatrix<T>, tol: &TolerancePolicy) -> Result<()> {
    let residual = structure_residual_dense(y, StructureKind::SkewHamiltonian);
    if !tol.accepts(residual, y.norm()) {
        return Err(Precondition::NotSkewHamiltonian { residual: to_f64(residual) }.into());
    }
    Ok(())
}

pub(crate) fn ensure_nondegenerate<T: Scalar>(m: &DMatrix<T>, tol: &TolerancePolicy) -> Result<()> {
    let (lo, hi) = singular_extremes(m);
    if hi == T::zero() || lo <= lit::<T>(tol.rel_tol) * hi {
        return Err(Precondition::Degenerate {
            smallest_singular_value: to_f64(lo),
            largest_singular_value: to_f64(hi),
        }
        .into());
    }
    Ok(())
}

fn skew_hamiltonian_part<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    // (M - J M^T J) / 2
    (m - j_left(&j_right(&m.transpose()))) * lit::<T>(0.5)
}

/// Principal square root of a skew-Hamiltonian matrix; the root is itself
/// skew-Hamiltonian because it is a polynomial in `Y`.
pub fn skew_hamiltonian_principal_sqrt<T: Scalar>(
    y: &Matrix2n<T>,
    tol: &TolerancePolicy,
) -> Result<Matrix2n<T>> {
    let ym = y.as_dmatrix();
    ensure_skew_hamiltonian(ym, tol)?;
    principal_sqrt_dense(ym, true, tol).map(Matrix2n::wrap)
}

/// Like [`skew_hamiltonian_principal_sqrt`], then replaces the root by its
/// skew-Hamiltonian part `(M - J M^T J) / 2` when that strictly lowers the
/// structure residual while at most doubling `||M^2 - Y||_F`.
pub fn skew_hamiltonian_principal_sqrt_projected<T: Scalar>(
    y: &Matrix2n<T>,
    tol: &TolerancePolicy,
) -> Result<Matrix2n<T>> {
    let m = skew_hamiltonian_principal_sqrt(y, tol)?.into_inner();
    let ym = y.as_dmatrix();
    let p = skew_hamiltonian_part(&m);
    let before = structure_residual_dense(&m, StructureKind::SkewHamiltonian);
    let after = structure_residual_dense(&p, StructureKind::SkewHamiltonian);
    let fit_m = (&m * &m - ym).norm();
    let fit_p = (&p * &p - ym).norm();
    let allowance = (fit_m * lit::<T>(2.0)).max(T::default_epsilon() * (T::one() + ym.norm()));
    if after < before && fit_p <= allowance {
        Ok(Matrix2n::wrap(p))
    } else {
        Ok(Matrix2n::wrap(m))
    }
}

/// One eigenvalue cluster: a real double eigenvalue, or a complex double
/// eigenvalue `re + i im` (im > 0) together with its conjugate.
#[derive(Debug, Clone, Copy)]
struct Cluster<T> {
    re: T,
    im: T,
}

impl<T: Scalar> Cluster<T> {
    fn is_real(&self) -> bool {
        self.im == T::zero()
    }

    fn dist(&self, other: &Self) -> T {
        (self.re - other.re).hypot(self.im - other.im)
    }
}

fn pair_eigenvalues<T: Scalar>(eigs: &[(T, T)], tol: &TolerancePolicy) -> Result<Vec<Cluster<T>>> {
    let m = eigs.len();
    let rho = eigs.iter().map(|&(re, im)| re.hypot(im)).fold(T::zero(), |a, b| a.max(b));
    let mut candidates = Vec::with_capacity(m * (m - 1) / 2);
    for a in 0..m {
        for b in (a + 1)..m {
            let d = (eigs[a].0 - eigs[b].0).hypot(eigs[a].1 - eigs[b].1);
            candidates.push((d, a, b));
        }
    }
    candidates.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut used = vec![false; m];
    let mut pairs = Vec::with_capacity(m / 2);
    for (_, a, b) in candidates {
        if !used[a] && !used[b] {
            used[a] = true;
            used[b] = true;
            pairs.push((a, b));
        }
    }
    let half = lit::<T>(0.5);
    let thr = lit::<T>(tol.imag_tol) * (T::one() + rho);
    let mut clusters = Vec::new();
    let (mut upper, mut lower) = (0usize, 0usize);
    for (a, b) in pairs {
        let re = (eigs[a].0 + eigs[b].0) * half;
        let im = (eigs[a].1 + eigs[b].1) * half;
        if im.abs() <= thr {
            clusters.push(Cluster { re, im: T::zero() });
        } else if im > T::zero() {
            upper += 1;
            clusters.push(Cluster { re, im });
        } else {
            lower += 1;
        }
    }
    if upper != lower {
        return Err(Error::DefectiveEigenstructure(
            "eigenvalues do not split into conjugate double pairs".into(),
        ));
    }
    clusters.sort_by(|x, y| {
        (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap_or(std::cmp::Ordering::Equal)
    });
    let sep = lit::<T>(tol.rel_tol.sqrt()) * (T::one() + rho);
    for a in 0..clusters.len() {
        for b in (a + 1)..clusters.len() {
            if clusters[a].dist(&clusters[b]) <= sep {
                return Err(Error::DefectiveEigenstructure(format!(
                    "eigenvalue {:.6e}{:+.6e}i has multiplicity above two",
                    clusters[a].re, clusters[a].im
                )));
            }
        }
    }
    Ok(clusters)
}

/// Indices of singular values in ascending order.
fn ascending<T: Scalar>(sv: &DVector<T>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..sv.len()).collect();
    idx.sort_by(|&a, &b| sv[a].partial_cmp(&sv[b]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

fn null_space_check<T: Scalar>(sv: &DVector<T>, idx: &[usize], null_tol: T, what: &str) -> Result<()> {
    let (s1, s2) = (sv[idx[1]], sv[idx[2.min(idx.len() - 1)]]);
    if s1 > null_tol || (idx.len() > 2 && s2 <= null_tol) {
        return Err(Error::DefectiveEigenstructure(format!(
            "eigenspace of {what} is not two-dimensional (singular values {:.3e}, {:.3e}, {:.3e})",
            sv[idx[0]], s1, s2
        )));
    }
    Ok(())
}

/// Orthonormal basis of the column span via thin QR.
fn orthonormalize<T: Scalar>(m: DMatrix<T>) -> DMatrix<T> {
    m.qr().q()
}

/// Real bases `(E, F)` of two complementary isotropic invariant subspaces
/// spanning the real invariant subspace of `cluster`.
fn cluster_bases<T: Scalar>(
    y: &DMatrix<T>,
    c: &Cluster<T>,
    null_tol: T,
) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let d = y.nrows();
    if c.is_real() {
        let mut shifted = y.clone();
        for i in 0..d {
            shifted[(i, i)] -= c.re;
        }
        let svd = shifted.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let idx = ascending(&svd.singular_values);
        null_space_check(&svd.singular_values, &idx, null_tol, &format!("{:.6e}", c.re))?;
        let e = vt.row(idx[0]).transpose();
        let f = vt.row(idx[1]).transpose();
        return Ok((DMatrix::from_column_slice(d, 1, e.as_slice()), DMatrix::from_column_slice(d, 1, f.as_slice())));
    }
    let lambda = Complex::new(c.re, c.im);
    let shifted = DMatrix::from_fn(d, d, |i, j| {
        let v = Complex::new(y[(i, j)], T::zero());
        if i == j {
            v - lambda
        } else {
            v
        }
    });
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested V^H");
    let idx = ascending(&svd.singular_values);
    null_space_check(
        &svd.singular_values,
        &idx,
        null_tol,
        &format!("{:.6e}{:+.6e}i", c.re, c.im),
    )?;
    // Null vectors are the conjugated rows of V^H.
    let real_pair = |k: usize| {
        let mut m = DMatrix::zeros(d, 2);
        for i in 0..d {
            let z = vt[(k, i)].conj();
            m[(i, 0)] = z.re;
            m[(i, 1)] = z.im;
        }
        orthonormalize(m)
    };
    Ok((real_pair(idx[0]), real_pair(idx[1])))
}

fn omega<T: Scalar>(a: &DVector<T>, b: &DVector<T>) -> T {
    // a^T J b
    let n = a.len() / 2;
    let mut acc = T::zero();
    for i in 0..n {
        acc += a[n + i] * b[i] - a[i] * b[n + i];
    }
    acc
}

/// Symplectic similarity bringing an eigen-generic skew-Hamiltonian `Y` to
/// `diag(N, N^T)`.
pub fn symplectic_block_diagonalize<T: Scalar>(
    y: &Matrix2n<T>,
    tol: &TolerancePolicy,
) -> Result<SymplecticBlockDiagonalization<T>> {
    let ym = y.as_dmatrix();
    ensure_skew_hamiltonian(ym, tol)?;
    ensure_nondegenerate(ym, tol)?;
    let n = y.n();
    let (_, t) = real_schur_dense(ym)?;
    let clusters = pair_eigenvalues(&block_eigenvalues(&t), tol)?;
    let null_tol = lit::<T>(1e-6) * (T::one() + ym.norm());

    // Collect (e, f) pairs with the complex clusters' 2-dimensional halves
    // pre-normalized so that E^T J F = -I.
    let mut pairs: Vec<(DVector<T>, DVector<T>)> = Vec::with_capacity(n);
    let mut block_sizes = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let (e, f) = cluster_bases(ym, c, null_tol)?;
        let g = e.transpose() * j_left(&f);
        let svd = g.svd(true, true);
        let (u, vt) = (svd.u.expect("U"), svd.v_t.expect("V^T"));
        let smax = svd.singular_values.max();
        if svd.singular_values.min() <= lit::<T>(tol.rel_tol) * smax.max(T::one()) {
            return Err(Error::DefectiveEigenstructure(
                "symplectic pairing of an eigenspace is numerically singular".into(),
            ));
        }
        let inv_sqrt = DMatrix::from_diagonal(&svd.singular_values.map(|s| T::one() / s.sqrt()));
        let e = e * u * &inv_sqrt;
        let f = -(f * vt.transpose() * &inv_sqrt);
        for k in 0..e.ncols() {
            pairs.push((e.column(k).clone_owned(), f.column(k).clone_owned()));
        }
        block_sizes.push(e.ncols());
    }
    if pairs.len() != n {
        return Err(Error::DefectiveEigenstructure(format!(
            "found {} symplectic pairs, expected {n}",
            pairs.len()
        )));
    }

    // Symplectic Gram-Schmidt across all pairs.
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let (mut e, mut f) = pairs[k].clone();
        for p in 0..k {
            let ep: DVector<T> = s.column(p).clone_owned();
            let fp: DVector<T> = s.column(n + p).clone_owned();
            for v in [&mut e, &mut f] {
                let beta = omega(&ep, v);
                let alpha = -omega(&fp, v);
                *v += &ep * alpha + &fp * beta;
            }
        }
        let g = omega(&e, &f);
        if g.abs() <= lit::<T>(tol.rel_tol) {
            return Err(Error::DefectiveEigenstructure(
                "symplectic pairing of an eigenspace is numerically singular".into(),
            ));
        }
        let r = g.abs().sqrt();
        e /= r;
        f /= if g > T::zero() { -r } else { r };
        s.set_column(k, &e);
        s.set_column(n + k, &f);
    }

    let b = symplectic_inverse_dense(&s) * ym * &s;
    let n_block = b.view((0, 0), (n, n)).clone_owned();
    Ok(SymplecticBlockDiagonalization { s: Matrix2n::wrap(s), n_block, block_sizes })
}

fn krylov<T: Scalar>(n_mat: &DMatrix<T>, v: &DVector<T>) -> DMatrix<T> {
    let n = n_mat.nrows();
    let mut k = DMatrix::zeros(n, n);
    let mut col = v.clone();
    for j in 0..n {
        k.set_column(j, &col);
        col = n_mat * col;
    }
    k
}

/// Factors `N = P Q` with `P`, `Q` symmetric.
///
/// Symmetric `N` returns `(N, I)`. Otherwise a Krylov basis
/// `K = [v, N v, ..., N^{n-1} v]` turns `N` into companion form `C`, which the
/// Hankel matrix `B` built from the characteristic polynomial symmetrizes
/// (`C B = B C^T`); then `Q^{-1} = K B K^T` and `P = N K B K^T`.
/// Seeds are the canonical basis vectors followed by fixed pseudorandom ones.
pub fn symmetric_pair_factorization<T: Scalar>(n_mat: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let n = n_mat.nrows();
    if n == 0 || n_mat.ncols() != n {
        return Err(Error::InvalidDimension(format!("expected a square matrix, got {}x{}", n, n_mat.ncols())));
    }
    let eps = T::default_epsilon();
    let scale = T::one() + n_mat.norm();
    if (n_mat - n_mat.transpose()).norm() <= eps * scale {
        return Ok((n_mat.clone(), DMatrix::identity(n, n)));
    }

    let mut seeds: Vec<DVector<T>> = (0..n).map(|i| DVector::from_fn(n, |k, _| if k == i { T::one() } else { T::zero() })).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..4 {
        seeds.push(DVector::from_fn(n, |_, _| lit::<T>(StandardNormal.sample(&mut rng))));
    }

    let accept = lit::<T>(1e-6) * scale;
    for v in seeds {
        let k = krylov(n_mat, &v);
        let (lo, hi) = singular_extremes(&k);
        if hi == T::zero() || lo <= lit::<T>(1e3) * eps * hi {
            continue;
        }
        let lu = k.clone().lu();
        let next = n_mat * k.column(n - 1);
        // K c = N^n v with c = -a (coefficients of the characteristic polynomial).
        let Some(c) = lu.solve(&next) else { continue };
        let coeff = |i: usize| if i == n { T::one() } else { -c[i] };
        let b = DMatrix::from_fn(n, n, |i, j| if i + j < n { coeff(i + j + 1) } else { T::zero() });
        let q_inv = &k * &b * k.transpose();
        let q_inv = (&q_inv + q_inv.transpose()) * lit::<T>(0.5);
        let p = n_mat * &q_inv;
        let p = (&p + p.transpose()) * lit::<T>(0.5);
        let Some(q) = q_inv.try_inverse() else { continue };
        let q = (&q + q.transpose()) * lit::<T>(0.5);
        if (&p * &q - n_mat).norm() <= accept {
            return Ok((p, q));
        }
    }
    Err(Error::DerogatoryInput)
}

/// Hamiltonian `H` with `H^2 = Y` for a nondegenerate eigen-generic
/// skew-Hamiltonian `Y`. Negative real eigenvalues of `Y` are allowed.
pub fn hamiltonian_sqrt<T: Scalar>(y: &Matrix2n<T>, tol: &TolerancePolicy) -> Result<Matrix2n<T>> {
    let bd = symplectic_block_diagonalize(y, tol)?;
    let n = y.n();
    let mut h0 = DMatrix::zeros(2 * n, 2 * n);
    let mut off = 0;
    for &k in &bd.block_sizes {
        let blk = bd.n_block.view((off, off), (k, k)).clone_owned();
        let (p, q) = symmetric_pair_factorization(&blk)?;
        let (pn, qn) = (p.norm(), q.norm());
        let s = if pn > T::zero() && qn > T::zero() { (pn / qn).sqrt() } else { T::one() };
        h0.view_mut((off, n + off), (k, k)).copy_from(&(p / s));
        h0.view_mut((n + off, off), (k, k)).copy_from(&(q * s));
        off += k;
    }
    let s = bd.s.as_dmatrix();
    let h = s * h0 * symplectic_inverse_dense(s);
    // Nearest Hamiltonian matrix: symmetrize J H and map back with J^{-1} = -J.
    let jh = j_left(&h);
    let h = -j_left(&((&jh + jh.transpose()) * lit::<T>(0.5)));

    let ym = y.as_dmatrix();
    let fit = (&h * &h - ym).norm();
    if fit > lit::<T>(tol.rel_tol.sqrt()) * (T::one() + ym.norm()) {
        return Err(Error::VerificationFailed(format!(
            "Hamiltonian root residual ||H^2 - Y||_F = {:.3e}",
            to_f64(fit)
        )));
    }
    Ok(Matrix2n::wrap(h))
}
