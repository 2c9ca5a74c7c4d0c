//! Real Schur form, real-eigenvalue classification, and the real principal
//! square root computed by a block recurrence on the quasi-triangular factor.

use nalgebra::{DMatrix, Schur};

use crate::error::{Error, Precondition, Result};
use crate::matrix::Matrix2n;
use crate::scalar::{lit, to_f64, Scalar};
use crate::symplectic::TolerancePolicy;

/// `A = Q T Q^T` with `Q` orthogonal and `T` quasi-upper-triangular.
///
/// Every 2x2 diagonal block of `T` has a complex-conjugate eigenvalue pair;
/// blocks with real eigenvalues are split during standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSchurForm<T: Scalar> {
    pub q: Matrix2n<T>,
    pub t: Matrix2n<T>,
}

/// A diagonal block of a quasi-triangular matrix: start index and size (1 or 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub size: usize,
}

impl<T: Scalar> RealSchurForm<T> {
    pub fn blocks(&self) -> Vec<Block> {
        diagonal_blocks(self.t.as_dmatrix())
    }

    /// Eigenvalues as `(re, im)` pairs, read off the diagonal blocks.
    pub fn eigenvalues(&self) -> Vec<(T, T)> {
        block_eigenvalues(self.t.as_dmatrix())
    }
}

pub(crate) fn diagonal_blocks<T: Scalar>(t: &DMatrix<T>) -> Vec<Block> {
    let d = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < d {
        if i + 1 < d && t[(i + 1, i)] != T::zero() {
            out.push(Block { start: i, size: 2 });
            i += 2;
        } else {
            out.push(Block { start: i, size: 1 });
            i += 1;
        }
    }
    out
}

pub(crate) fn block_eigenvalues<T: Scalar>(t: &DMatrix<T>) -> Vec<(T, T)> {
    let mut out = Vec::with_capacity(t.nrows());
    for b in diagonal_blocks(t) {
        if b.size == 1 {
            out.push((t[(b.start, b.start)], T::zero()));
        } else {
            let (re, im) = complex_pair(
                t[(b.start, b.start)],
                t[(b.start, b.start + 1)],
                t[(b.start + 1, b.start)],
                t[(b.start + 1, b.start + 1)],
            );
            out.push((re, im));
            out.push((re, -im));
        }
    }
    out
}

/// Eigenvalues of a skew-Hamiltonian matrix from its real Schur form `t`.
///
/// Every eigenvalue of such a matrix has even multiplicity, so a complex pair
/// occupies two 2x2 blocks. A 2x2 block with no partner and a small imaginary
/// part is a real double eigenvalue split by rounding; it is reported as real.
pub(crate) fn skew_hamiltonian_eigenvalues<T: Scalar>(t: &DMatrix<T>) -> Vec<(T, T)> {
    let eigs = block_eigenvalues(t);
    let rho = eigs.iter().map(|&(re, im)| re.hypot(im)).fold(T::zero(), |a, b| a.max(b));
    let near = lit::<T>(1e-4) * (T::one() + rho);
    let pairs: Vec<usize> = (0..eigs.len()).filter(|&i| eigs[i].1 > T::zero()).collect();
    let mut partner = vec![false; eigs.len()];
    for (a, &i) in pairs.iter().enumerate() {
        if partner[i] {
            continue;
        }
        let best = pairs[a + 1..]
            .iter()
            .copied()
            .filter(|&j| !partner[j])
            .map(|j| (j, (eigs[i].0 - eigs[j].0).abs() + (eigs[i].1 - eigs[j].1).abs()))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap_or(std::cmp::Ordering::Equal));
        if let Some((j, dist)) = best {
            if dist <= near {
                partner[i] = true;
                partner[j] = true;
            }
        }
    }
    let mut out = eigs.clone();
    for &i in &pairs {
        if !partner[i] && eigs[i].1 <= near {
            out[i].1 = T::zero();
            out[i + 1].1 = T::zero();
        }
    }
    out
}

/// `(theta, mu)` with eigenvalues `theta +- i mu` of `[[a, b], [c, d]]`,
/// assuming the discriminant is negative.
fn complex_pair<T: Scalar>(a: T, b: T, c: T, d: T) -> (T, T) {
    let two = lit::<T>(2.0);
    let theta = (a + d) / two;
    let det = a * d - b * c;
    let mu2 = det - theta * theta;
    (theta, mu2.max(T::zero()).sqrt())
}

/// Rotates every 2x2 diagonal block with real eigenvalues into upper
/// triangular form, updating `q` to keep `A = Q T Q^T`.
fn standardize<T: Scalar>(q: &mut DMatrix<T>, t: &mut DMatrix<T>) {
    let d = t.nrows();
    let eps = T::default_epsilon();
    for i in 0..d.saturating_sub(1) {
        let scale = t[(i, i)].abs() + t[(i + 1, i + 1)].abs();
        if t[(i + 1, i)].abs() <= eps * scale {
            t[(i + 1, i)] = T::zero();
        }
    }
    let two = lit::<T>(2.0);
    let mut i = 0;
    while i + 1 < d {
        if t[(i + 1, i)] == T::zero() {
            i += 1;
            continue;
        }
        let (a, b, c, dd) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
        let half = (a - dd) / two;
        let disc = half * half + b * c;
        if disc < T::zero() {
            i += 2;
            continue;
        }
        // Eigenvector for the eigenvalue farther from d avoids cancellation.
        let root = disc.sqrt();
        let lambda = if half >= T::zero() { (a + dd) / two + root } else { (a + dd) / two - root };
        let (mut x, mut y) = (b, lambda - a);
        if x.abs() + y.abs() <= eps * (a.abs() + b.abs() + c.abs() + dd.abs()) {
            x = lambda - dd;
            y = c;
        }
        let r = (x * x + y * y).sqrt();
        if r == T::zero() {
            t[(i + 1, i)] = T::zero();
            i += 2;
            continue;
        }
        let (cs, sn) = (x / r, y / r);
        // T <- G^T T G with G = [[cs, -sn], [sn, cs]] acting on rows/cols i, i+1.
        for k in 0..d {
            let (ti, tj) = (t[(i, k)], t[(i + 1, k)]);
            t[(i, k)] = cs * ti + sn * tj;
            t[(i + 1, k)] = -sn * ti + cs * tj;
        }
        for k in 0..d {
            let (ti, tj) = (t[(k, i)], t[(k, i + 1)]);
            t[(k, i)] = cs * ti + sn * tj;
            t[(k, i + 1)] = -sn * ti + cs * tj;
            let (qi, qj) = (q[(k, i)], q[(k, i + 1)]);
            q[(k, i)] = cs * qi + sn * qj;
            q[(k, i + 1)] = -sn * qi + cs * qj;
        }
        t[(i + 1, i)] = T::zero();
        i += 2;
    }
    for j in 0..d {
        for i in (j + 1)..d {
            let on_block = i == j + 1 && t[(i, j)] != T::zero();
            if !on_block {
                t[(i, j)] = T::zero();
            }
        }
    }
}

pub(crate) fn real_schur_dense<T: Scalar>(a: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let budget = 30 * a.nrows();
    let schur = Schur::try_new(a.clone(), T::default_epsilon(), budget)
        .ok_or(Error::NonConvergence { iterations: budget })?;
    let (mut q, mut t) = schur.unpack();
    standardize(&mut q, &mut t);
    Ok((q, t))
}

/// Real Schur decomposition `A = Q T Q^T`.
///
/// Fails with [`Error::NonConvergence`] after `30 * 2n` QR iterations.
pub fn real_schur<T: Scalar>(a: &Matrix2n<T>) -> Result<RealSchurForm<T>> {
    let (q, t) = real_schur_dense(a.as_dmatrix())?;
    Ok(RealSchurForm { q: Matrix2n::wrap(q), t: Matrix2n::wrap(t) })
}

/// Sign summary of the real part of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenClassification {
    pub has_zero: bool,
    pub has_negative_real: bool,
    pub has_positive_real: bool,
    /// Real eigenvalues (zeros included), ascending, with multiplicity.
    pub real_eigenvalues: Vec<f64>,
    pub spectral_radius: f64,
    /// `imag_tol * (1 + spectral_radius)`, the realness and zero threshold used.
    pub zero_threshold: f64,
}

impl EigenClassification {
    /// Real eigenvalues that are zero or negative.
    pub fn non_positive(&self) -> Vec<f64> {
        let thr = self.zero_threshold;
        self.real_eigenvalues.iter().copied().filter(|&x| x <= thr).collect()
    }

    /// Real eigenvalues that are zero or positive.
    pub fn non_negative(&self) -> Vec<f64> {
        let thr = self.zero_threshold;
        self.real_eigenvalues.iter().copied().filter(|&x| x >= -thr).collect()
    }
}

pub(crate) fn classify_eigenvalues<T: Scalar>(
    eigs: &[(T, T)],
    tol: &TolerancePolicy,
) -> EigenClassification {
    let rho = eigs.iter().map(|&(re, im)| to_f64(re.hypot(im))).fold(0.0_f64, f64::max);
    let thr = tol.imag_tol * (1.0 + rho);
    let mut real = Vec::new();
    let (mut zero, mut neg, mut pos) = (false, false, false);
    for &(re, im) in eigs {
        let (re, im) = (to_f64(re), to_f64(im));
        if im.abs() > thr {
            continue;
        }
        real.push(re);
        if re.abs() <= thr {
            zero = true;
        } else if re < 0.0 {
            neg = true;
        } else {
            pos = true;
        }
    }
    real.sort_by(|a, b| a.total_cmp(b));
    EigenClassification {
        has_zero: zero,
        has_negative_real: neg,
        has_positive_real: pos,
        real_eigenvalues: real,
        spectral_radius: rho,
        zero_threshold: thr,
    }
}

/// Classifies the real eigenvalues of `A` by sign.
///
/// An eigenvalue counts as real when `|Im| <= imag_tol * (1 + rho)` and as zero
/// when additionally `|Re|` is under the same bound, `rho` being the spectral radius.
pub fn classify_real_eigenvalues<T: Scalar>(
    a: &Matrix2n<T>,
    tol: &TolerancePolicy,
) -> Result<EigenClassification> {
    let (_, t) = real_schur_dense(a.as_dmatrix())?;
    Ok(classify_eigenvalues(&block_eigenvalues(&t), tol))
}

/// [`classify_real_eigenvalues`] for a skew-Hamiltonian `Y`, using that every
/// eigenvalue of `Y` has even multiplicity: a 2x2 Schur block without a
/// matching partner block is counted as a real double eigenvalue. This is the
/// classification behind the eigenvalue-sign preconditions of the
/// decompositions.
pub fn classify_skew_hamiltonian_eigenvalues<T: Scalar>(
    y: &Matrix2n<T>,
    tol: &TolerancePolicy,
) -> Result<EigenClassification> {
    let (_, t) = real_schur_dense(y.as_dmatrix())?;
    Ok(classify_eigenvalues(&skew_hamiltonian_eigenvalues(&t), tol))
}

/// Principal square root of a 1x1 or 2x2 diagonal block.
fn block_sqrt<T: Scalar>(blk: &DMatrix<T>) -> DMatrix<T> {
    if blk.nrows() == 1 {
        return DMatrix::from_element(1, 1, blk[(0, 0)].sqrt());
    }
    let (theta, mu) = complex_pair(blk[(0, 0)], blk[(0, 1)], blk[(1, 0)], blk[(1, 1)]);
    // alpha + i beta = sqrt(theta + i mu), alpha > 0.
    let two = lit::<T>(2.0);
    let modulus = theta.hypot(mu);
    let alpha = ((modulus + theta) / two).sqrt();
    let mut root = blk.clone();
    root[(0, 0)] -= theta;
    root[(1, 1)] -= theta;
    root /= two * alpha;
    root[(0, 0)] += alpha;
    root[(1, 1)] += alpha;
    root
}

/// Solves `A X + X B = C` for blocks of size at most 2 via the Kronecker form.
fn small_sylvester<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>, c: &DMatrix<T>) -> Option<DMatrix<T>> {
    let (p, q) = (a.nrows(), b.nrows());
    let mut sys = DMatrix::zeros(p * q, p * q);
    // vec(A X) = (I_q kron A) vec X, vec(X B) = (B^T kron I_p) vec X.
    for col in 0..q {
        for i in 0..p {
            for k in 0..p {
                sys[(col * p + i, col * p + k)] += a[(i, k)];
            }
            for l in 0..q {
                sys[(col * p + i, l * p + i)] += b[(l, col)];
            }
        }
    }
    let rhs = nalgebra::DVector::from_iterator(p * q, c.iter().copied());
    let sol = sys.lu().solve(&rhs)?;
    Some(DMatrix::from_column_slice(p, q, sol.as_slice()))
}

/// Square root of a standardized quasi-triangular matrix whose diagonal
/// blocks all have spectra off the closed negative real axis.
pub(crate) fn quasi_triangular_sqrt<T: Scalar>(t: &DMatrix<T>) -> Result<DMatrix<T>> {
    let blocks = diagonal_blocks(t);
    let d = t.nrows();
    let mut u = DMatrix::zeros(d, d);
    for b in &blocks {
        let blk = t.view((b.start, b.start), (b.size, b.size)).clone_owned();
        u.view_mut((b.start, b.start), (b.size, b.size)).copy_from(&block_sqrt(&blk));
    }
    for jb in 0..blocks.len() {
        let bj = blocks[jb];
        for ib in (0..jb).rev() {
            let bi = blocks[ib];
            let mut rhs = t.view((bi.start, bj.start), (bi.size, bj.size)).clone_owned();
            for kb in blocks.iter().take(jb).skip(ib + 1) {
                let uik = u.view((bi.start, kb.start), (bi.size, kb.size));
                let ukj = u.view((kb.start, bj.start), (kb.size, bj.size));
                rhs -= uik * ukj;
            }
            let uii = u.view((bi.start, bi.start), (bi.size, bi.size)).clone_owned();
            let ujj = u.view((bj.start, bj.start), (bj.size, bj.size)).clone_owned();
            let x = small_sylvester(&uii, &ujj, &rhs).ok_or_else(|| {
                Error::VerificationFailed("singular Sylvester block in square-root recurrence".into())
            })?;
            u.view_mut((bi.start, bj.start), (bi.size, bj.size)).copy_from(&x);
        }
    }
    Ok(u)
}

pub(crate) fn principal_sqrt_dense<T: Scalar>(
    a: &DMatrix<T>,
    skew_hamiltonian: bool,
    tol: &TolerancePolicy,
) -> Result<DMatrix<T>> {
    let (q, t) = real_schur_dense(a)?;
    let eigs = if skew_hamiltonian { skew_hamiltonian_eigenvalues(&t) } else { block_eigenvalues(&t) };
    let class = classify_eigenvalues(&eigs, tol);
    if class.has_zero || class.has_negative_real {
        return Err(Precondition::NegativeOrZeroRealEigenvalue { eigenvalues: class.non_positive() }.into());
    }
    let u = quasi_triangular_sqrt(&t)?;
    Ok(&q * u * q.transpose())
}

/// Real principal square root: `M^2 = A` with the spectrum of `M` in the open
/// right half-plane. `M` is a polynomial in `A`, so it commutes with `A`.
pub fn principal_sqrt_real<T: Scalar>(a: &Matrix2n<T>, tol: &TolerancePolicy) -> Result<Matrix2n<T>> {
    principal_sqrt_dense(a.as_dmatrix(), false, tol).map(Matrix2n::wrap)
}
