//! Seeded random matrices. Entries are real and imaginary parts drawn
//! independently from `uniform(-1, 1)`.

use rand::Rng;

use super::cmatrix::{CMatrix, C64};
use super::orthonormal_range;

pub fn random_scalar(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| random_scalar(rng))
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Random PSD matrix `G G^*` of the given rank.
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> CMatrix {
    let g = random_matrix(rng, n, rank);
    g.matmul(&g.adjoint())
}

/// Random isometry `C^cols -> C^rows` (`rows >= cols`).
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    assert!(rows >= cols, "random_isometry: {rows} < {cols}");
    loop {
        let g = random_matrix(rng, rows, cols);
        let q = orthonormal_range(&g, 1e-8).expect("non-empty");
        if q.cols() == cols {
            return q;
        }
    }
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    random_isometry(rng, n, n)
}
