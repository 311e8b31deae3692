//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is a pure function on immutable values. Tolerances are
//! relative to the norm of the input.

mod cmatrix;
mod eig;
pub mod random;
mod svd;

pub use cmatrix::{CMatrix, C64, I, ONE, ZERO};
pub use eig::{eig_hermitian, eig_hermitian_warm, Eigh, MAX_SWEEPS};
pub use svd::{singular_values, svd, Svd};

use crate::error::{Error, Result};

/// Hermiticity check: `max |M - M^*| <= HERMITIAN_TOL (1 + ||M||)`.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// PSD decision: `min eig >= -PSD_TOL (1 + ||M||)`.
pub const PSD_TOL: f64 = 1e-9;
/// Relative singular-value cutoff for numerical spans.
pub const RANK_TOL: f64 = 1e-8;
/// Relative cutoff used by [`solve_lstsq`].
pub const LSTSQ_RCOND: f64 = 1e-12;

#[cfg(test)]
pub(crate) use random as testing;

/// Scale used by the relative PSD test.
pub fn psd_threshold(m: &CMatrix) -> f64 {
    -PSD_TOL * (1.0 + m.frobenius_norm())
}

/// Smallest eigenvalue of a Hermitian matrix (0 for the empty matrix).
pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(eig_hermitian(m)?.min())
}

pub fn is_psd(m: &CMatrix) -> Result<bool> {
    Ok(min_eigenvalue(m)? >= psd_threshold(m))
}

/// Frobenius-nearest PSD matrix: `U max(lambda, 0) U^*`.
pub fn psd_project(m: &CMatrix) -> Result<CMatrix> {
    let e = eig_hermitian(m)?;
    Ok(e.rebuild(|l| l.max(0.0)))
}

/// Principal square root of a PSD matrix (negative eigenvalues clamped).
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let e = eig_hermitian(m)?;
    Ok(e.rebuild(|l| l.max(0.0).sqrt()))
}

/// Orthonormal basis of the span of the columns of `vectors`.
///
/// Singular values below `rank_tol * sigma_max` are discarded. An all-zero
/// family yields a matrix with zero columns.
pub fn orthonormal_range(vectors: &CMatrix, rank_tol: f64) -> Result<CMatrix> {
    if vectors.cols() == 0 {
        return Err(Error::EmptyInput);
    }
    let s = svd(vectors);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let cutoff = rank_tol * smax;
    let keep: Vec<usize> = (0..s.sigma.len()).filter(|&k| smax > 0.0 && s.sigma[k] > cutoff).collect();
    Ok(s.u.select_cols(&keep))
}

/// [`orthonormal_range`] over a list of column vectors of equal height.
pub fn orthonormal_range_of(vectors: &[CMatrix], rank_tol: f64) -> Result<CMatrix> {
    if vectors.is_empty() {
        return Err(Error::EmptyInput);
    }
    let h = vectors[0].rows();
    if vectors.iter().any(|v| v.rows() != h) {
        return Err(Error::ShapeMismatch("vectors of different heights".into()));
    }
    orthonormal_range(&CMatrix::hstack(vectors), rank_tol)
}

/// Numerical rank at relative tolerance `rank_tol`.
pub fn numerical_rank(m: &CMatrix, rank_tol: f64) -> usize {
    if m.rows() == 0 || m.cols() == 0 {
        return 0;
    }
    let s = singular_values(m);
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rank_tol * smax).count()
}

/// Minimum-norm least-squares solution `X = A^+ B`.
pub fn solve_lstsq(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    solve_lstsq_rcond(a, b, LSTSQ_RCOND)
}

/// [`solve_lstsq`] with an explicit relative singular-value cutoff.
pub fn solve_lstsq_rcond(a: &CMatrix, b: &CMatrix, rcond: f64) -> Result<CMatrix> {
    if a.rows() != b.rows() {
        return Err(Error::ShapeMismatch(format!(
            "lstsq: A has {} rows, B has {}",
            a.rows(),
            b.rows()
        )));
    }
    Ok(pseudo_inverse(a, rcond).matmul(b))
}

pub fn pseudo_inverse(a: &CMatrix, rcond: f64) -> CMatrix {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return CMatrix::zeros(n, m);
    }
    let s = svd(a);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let mut vs = s.v.clone();
    for (k, &sig) in s.sigma.iter().enumerate() {
        let w = if smax > 0.0 && sig > rcond * smax { 1.0 / sig } else { 0.0 };
        for i in 0..vs.rows() {
            vs[(i, k)] *= w;
        }
    }
    vs.matmul(&s.u.adjoint())
}

/// Orthonormal basis of `ker A`: right singular vectors with
/// `sigma <= tol * max(sigma_max, 1)`.
pub fn nullspace(a: &CMatrix, tol: f64) -> CMatrix {
    let (m, n) = a.shape();
    if n == 0 {
        return CMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the thin SVD carries a full set of right vectors.
    let padded = if m < n { CMatrix::vstack(&[a.clone(), CMatrix::zeros(n - m, n)]) } else { a.clone() };
    let s = svd(&padded);
    let smax = s.sigma.first().copied().unwrap_or(0.0);
    let cutoff = tol * smax.max(1.0);
    let keep: Vec<usize> = (0..n).filter(|&k| s.sigma[k] <= cutoff).collect();
    s.v.select_cols(&keep)
}

/// Nearest unitary (polar factor) of a square matrix, computed from the
/// eigendecomposition of `T^* T`.
pub fn polar_unitary(t: &CMatrix) -> Result<CMatrix> {
    let gram = t.adjoint_mul(t);
    let e = eig_hermitian(&gram)?;
    let smax = e.max().max(0.0).sqrt();
    if smax == 0.0 {
        return Err(Error::IllConditioned("polar factor of the zero operator".into()));
    }
    if e.min() <= (1e-14 * smax).powi(2) {
        return Err(Error::IllConditioned(format!(
            "polar factor of a singular operator (min eigenvalue of T*T {:.3e})",
            e.min()
        )));
    }
    let inv_sqrt = e.rebuild(|l| 1.0 / l.sqrt());
    Ok(t.matmul(&inv_sqrt))
}

/// Orthogonal projector `Q Q^*` onto the columns of an isometry.
pub fn projector(q: &CMatrix) -> CMatrix {
    q.matmul(&q.adjoint())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::testing::{random_hermitian, random_matrix};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> CMatrix {
        CMatrix::from_real(v.len(), 1, v)
    }

    #[test]
    fn psd_project_clamps_diagonal() {
        let m = CMatrix::diag_real(&[2.0, -3.0]);
        let p = psd_project(&m).unwrap();
        assert!(p.max_abs_diff(&CMatrix::diag_real(&[2.0, 0.0])) < 1e-15);
    }

    #[test]
    fn psd_project_fixes_psd_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_matrix(&mut rng, 4, 4);
        let m = g.matmul(&g.adjoint());
        assert!(psd_project(&m).unwrap().max_abs_diff(&m) <= 1e-10);
    }

    #[test]
    fn psd_project_pauli_x() {
        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = psd_project(&x).unwrap();
        // Oracle: spectrum (-1, 1) with eigenvector (1,1)/sqrt2 for +1.
        let expected = CMatrix::from_real(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(p.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn range_of_collinear_pair() {
        let q = orthonormal_range_of(&[col(&[1.0, 0.0]), col(&[2.0, 0.0])], RANK_TOL).unwrap();
        assert_eq!(q.cols(), 1);
        assert!((q[(0, 0)].norm() - 1.0).abs() < 1e-15);
        assert!(q[(1, 0)].norm() < 1e-15);
    }

    #[test]
    fn range_of_basis() {
        let q = orthonormal_range_of(&[col(&[1.0, 0.0]), col(&[0.0, 1.0])], RANK_TOL).unwrap();
        assert_eq!(q.cols(), 2);
        assert!(q.isometry_defect() < 1e-14);
    }

    #[test]
    fn range_of_three_vectors_in_c2() {
        let vs = [col(&[1.0, 1.0]), col(&[1.0, -1.0]), col(&[3.0, 1.0])];
        let q = orthonormal_range_of(&vs, RANK_TOL).unwrap();
        assert_eq!(q.cols(), 2);
        assert!(projector(&q).max_abs_diff(&CMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn range_rejects_empty() {
        assert!(matches!(orthonormal_range_of(&[], RANK_TOL), Err(Error::EmptyInput)));
    }

    #[test]
    fn lstsq_identity_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_matrix(&mut rng, 3, 2);
        assert!(solve_lstsq(&CMatrix::identity(3), &b).unwrap().max_abs_diff(&b) < 1e-14);
        let x = solve_lstsq(&CMatrix::identity(2).scale_real(2.0), &CMatrix::identity(2)).unwrap();
        assert!(x.max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
    }

    #[test]
    fn lstsq_rank_deficient_minimum_norm() {
        let a = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let b = col(&[1.0, 1.0]);
        let x = solve_lstsq(&a, &b).unwrap();
        // Normal equations A^*A x = A^*b give x1 = 1, x2 free; minimum norm sets x2 = 0.
        assert!(x.max_abs_diff(&col(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let a = CMatrix::from_real(1, 3, &[1.0, 1.0, 0.0]);
        let k = nullspace(&a, 1e-10);
        assert_eq!(k.cols(), 2);
        assert!(a.matmul(&k).max_abs() < 1e-14);
    }

    #[test]
    fn polar_of_scaled_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random::random_unitary(&mut rng, 3);
        let p = polar_unitary(&u.scale_real(3.0)).unwrap();
        assert!(p.max_abs_diff(&u) < 1e-12);
    }

    fn seeds() -> impl Strategy<Value = (u64, usize)> {
        (any::<u64>(), 2usize..=10)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eig_reconstruction_property((seed, n) in seeds()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_hermitian(&mut rng, n);
            let e = eig_hermitian(&m).unwrap();
            let back = e.rebuild(|l| l);
            prop_assert!(back.distance(&m) <= 1e-9 * m.frobenius_norm());
            prop_assert!(e.vectors.isometry_defect() <= 1e-10);
        }

        #[test]
        fn psd_project_idempotent((seed, n) in seeds()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_hermitian(&mut rng, n);
            let p = psd_project(&m).unwrap();
            let pp = psd_project(&p).unwrap();
            prop_assert!(pp.max_abs_diff(&p) <= 1e-10);
            prop_assert!(min_eigenvalue(&p).unwrap() >= -1e-12);
        }

        #[test]
        fn psd_project_monotone_on_commuting((seed, n) in seeds()) {
            // A <= B with shared eigenvectors implies proj(A) <= proj(B).
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random::random_unitary(&mut rng, n);
            let la: Vec<f64> = (0..n).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
            let lb: Vec<f64> = la.iter().map(|&l| l + rand::Rng::random_range(&mut rng, 0.0..1.0)).collect();
            let conj = |d: &[f64]| u.matmul(&CMatrix::diag_real(d)).matmul(&u.adjoint()).hermitian_part();
            let pa = psd_project(&conj(&la)).unwrap();
            let pb = psd_project(&conj(&lb)).unwrap();
            prop_assert!(min_eigenvalue(&(&pb - &pa).hermitian_part()).unwrap() >= -1e-10);
        }

        #[test]
        fn range_projector_properties(seed in any::<u64>(), h in 1usize..6, k in 1usize..6, rank in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rank.min(h).min(k);
            let vs = random_matrix(&mut rng, h, r).matmul(&random_matrix(&mut rng, r, k));
            let q = orthonormal_range(&vs, RANK_TOL).unwrap();
            prop_assert_eq!(q.cols(), r);
            let p = projector(&q);
            prop_assert!(p.matmul(&p).max_abs_diff(&p) <= 1e-9);
            prop_assert!(p.adjoint().max_abs_diff(&p) <= 1e-9);
            for j in 0..k {
                let v = vs.col(j);
                prop_assert!(p.matmul(&v).distance(&v) <= RANK_TOL * v.frobenius_norm().max(1e-300) + 1e-12);
            }
        }
    }
}
