//! Seeded instance generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{validity_margin_dense, GaussianChannelTriple};
use crate::error::Result;
use crate::matrix::{check_modes, singular_extremes, Matrix2n, Vector2n};
use crate::scalar::{lit, Scalar};

/// Largest condition number accepted by [`nondegenerate`].
pub const MAX_CONDITION: f64 = 1e6;

/// Margin added on top of the smallest admissible noise shift.
pub const CHANNEL_MARGIN: f64 = 1e-6;

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let x: f64 = StandardNormal.sample(rng);
        lit(x)
    })
}

/// Matrix with independent standard normal entries.
pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    Ok(Matrix2n::wrap(gaussian(2 * n, 2 * n, rng)))
}

/// Gaussian matrix resampled until its condition number is at most [`MAX_CONDITION`].
pub fn nondegenerate<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    loop {
        let m = gaussian::<T, _>(2 * n, 2 * n, rng);
        let (lo, hi) = singular_extremes(&m);
        if lo > T::zero() && hi / lo <= lit(MAX_CONDITION) {
            return Ok(Matrix2n::wrap(m));
        }
    }
}

fn symmetric<T: Scalar, R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> DMatrix<T> {
    let g = gaussian::<T, _>(n, n, rng);
    (&g + g.transpose()) * lit::<T>(0.5 * scale)
}

fn skew<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = gaussian::<T, _>(n, n, rng);
    (&g - g.transpose()) * lit::<T>(0.5)
}

/// Product of elementary symplectic factors: an upper shear `[[I, B], [0, I]]`,
/// a block-diagonal `[[A, 0], [0, A^{-T}]]`, and a lower shear `[[I, 0], [C, I]]`,
/// with `B`, `C` symmetric and `A` lower unit triangular so `A^{-T}` is exact
/// up to rounding.
pub fn symplectic<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    let d = 2 * n;
    let mut upper = DMatrix::<T>::identity(d, d);
    upper.view_mut((0, n), (n, n)).copy_from(&symmetric::<T, _>(n, 0.5, rng));
    let mut lower = DMatrix::<T>::identity(d, d);
    lower.view_mut((n, 0), (n, n)).copy_from(&symmetric::<T, _>(n, 0.5, rng));

    let mut a = DMatrix::<T>::identity(n, n);
    for i in 0..n {
        for j in 0..i {
            let x: f64 = StandardNormal.sample(rng);
            a[(i, j)] = lit(0.5 * x);
        }
    }
    // Positive diagonal scaling applied as a separate exact factor pair.
    let scales: Vec<T> = (0..n)
        .map(|_| {
            let u: f64 = rng.random_range(-0.5..0.5);
            lit(u.exp())
        })
        .collect();
    let a_inv_t = a
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("unit triangular")
        .transpose();
    let mut block = DMatrix::<T>::zeros(d, d);
    block.view_mut((0, 0), (n, n)).copy_from(&a);
    block.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
    let mut scale = DMatrix::<T>::identity(d, d);
    for i in 0..n {
        scale[(i, i)] = scales[i];
        scale[(n + i, n + i)] = T::one() / scales[i];
    }
    Ok(Matrix2n::wrap(upper * block * scale * lower))
}

/// `[[A, B], [C, A^T]]` with `B`, `C` skew-symmetric.
pub fn skew_hamiltonian<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    let a = gaussian::<T, _>(n, n, rng);
    let mut m = DMatrix::<T>::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((n, n), (n, n)).copy_from(&a.transpose());
    m.view_mut((0, n), (n, n)).copy_from(&skew::<T, _>(n, rng));
    m.view_mut((n, 0), (n, n)).copy_from(&skew::<T, _>(n, rng));
    Ok(Matrix2n::wrap(m))
}

/// `G G^T / (2n) + I / 10`, symmetric positive definite.
pub fn positive_definite<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Matrix2n<T>> {
    check_modes(n)?;
    let d = 2 * n;
    let g = gaussian::<T, _>(d, d, rng);
    let mut a = &g * g.transpose() / lit::<T>(d as f64);
    for i in 0..d {
        a[(i, i)] += lit::<T>(0.1);
    }
    let a = (&a + a.transpose()) * lit::<T>(0.5);
    Ok(Matrix2n::wrap(a))
}

/// Valid channel: Gaussian `K` and `l`, `alpha = B + c I` with `B = G G^T / (2n)`
/// and `c` the smallest shift making `alpha - (i/2)(J - K^T J K)` positive
/// semidefinite, plus [`CHANNEL_MARGIN`].
pub fn valid_channel<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<GaussianChannelTriple<T>> {
    check_modes(n)?;
    let d = 2 * n;
    let k = gaussian::<T, _>(d, d, rng);
    let l = gaussian::<T, _>(d, 1, rng);
    let g = gaussian::<T, _>(d, d, rng);
    let b = &g * g.transpose() / lit::<T>(d as f64);
    let b = (&b + b.transpose()) * lit::<T>(0.5);
    let min_eig = validity_margin_dense(&b, &k);
    let c = (-min_eig).max(T::zero()) + lit(CHANNEL_MARGIN);
    let mut alpha = b;
    for i in 0..d {
        alpha[(i, i)] += c;
    }
    GaussianChannelTriple::new(
        Matrix2n::wrap(k),
        Vector2n::wrap(l.column(0).clone_owned()),
        Matrix2n::wrap(alpha),
    )
}

/// Random channel whose `K` has `det K` of the requested sign.
pub fn valid_channel_with_det_sign<T: Scalar, R: Rng + ?Sized>(
    n: usize,
    positive: bool,
    rng: &mut R,
) -> Result<GaussianChannelTriple<T>> {
    loop {
        let c = valid_channel::<T, _>(n, rng)?;
        let det = c.k.determinant();
        let (lo, hi) = singular_extremes(c.k.as_dmatrix());
        if lo > T::zero() && hi / lo <= lit(MAX_CONDITION) && (det > T::zero()) == positive {
            return Ok(c);
        }
    }
}
