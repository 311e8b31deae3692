//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies a real Givens rotation, so the combined plane
//! unitary is `[[c, s], [-s e, c e]]` with `|e| = 1`. Pivots are visited in
//! row-major order over the strict upper triangle; the same input always
//! produces bit-identical output.

use super::cmatrix::{CMatrix, C64, ZERO};
use super::HERMITIAN_TOL;
use crate::error::{Error, Result};

pub const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `M = U diag(values) U^*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Reassemble `U f(diag) U^*`.
    pub fn rebuild(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = u[(i, k)] * w;
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)].conj();
                }
            }
        }
        out
    }
}

pub fn eig_hermitian(m: &CMatrix) -> Result<Eigh> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "eig_hermitian needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.frobenius_norm();
    let residual = m.hermiticity_residual();
    if residual > HERMITIAN_TOL * (1.0 + scale) {
        return Err(Error::NotHermitian { residual });
    }
    jacobi(m.hermitian_part(), CMatrix::identity(m.rows()))
}

/// Like [`eig_hermitian`], but starts from a caller-supplied unitary guess.
///
/// `M` is first rotated into the basis `guess`; when the guess is close to an
/// eigenbasis the sweep count drops to one or two. Used by iterative solvers
/// that decompose a slowly changing sequence of matrices.
pub fn eig_hermitian_warm(m: &CMatrix, guess: &CMatrix) -> Result<Eigh> {
    if guess.shape() != m.shape() {
        return eig_hermitian(m);
    }
    let scale = m.frobenius_norm();
    let residual = m.hermiticity_residual();
    if residual > HERMITIAN_TOL * (1.0 + scale) {
        return Err(Error::NotHermitian { residual });
    }
    let rotated = guess.adjoint_mul(&m.matmul(guess)).hermitian_part();
    jacobi(rotated, guess.clone())
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(mut a: CMatrix, mut u: CMatrix) -> Result<Eigh> {
    let n = a.rows();
    let norm = a.frobenius_norm();
    let stop = 1e-15 * norm;
    let negligible = 1e-18 * norm;

    let mut converged = n <= 1 || norm == 0.0;
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&a) <= stop {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g <= negligible {
                    if g != 0.0 {
                        a[(p, q)] = ZERO;
                        a[(q, p)] = ZERO;
                    }
                    continue;
                }
                rotated = true;
                rotate(&mut a, &mut u, p, q, apq, g);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = u.select_cols(&order);
    Ok(Eigh { values, vectors })
}

fn rotate(a: &mut CMatrix, u: &mut CMatrix, p: usize, q: usize, apq: C64, g: f64) {
    let n = a.rows();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let e = apq.conj() / g;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = [[jpp, jpq], [jqp, jqq]] acting on coordinates (p, q).
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = e * (-s);
    let jqq = e * c;

    // A <- A J
    for k in 0..n {
        let xp = a[(k, p)];
        let xq = a[(k, q)];
        a[(k, p)] = xp * jpp + xq * jqp;
        a[(k, q)] = xp * jpq + xq * jqq;
    }
    // A <- J^* A
    for k in 0..n {
        let xp = a[(p, k)];
        let xq = a[(q, k)];
        a[(p, k)] = jpp.conj() * xp + jqp.conj() * xq;
        a[(q, k)] = jpq.conj() * xp + jqq.conj() * xq;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
    // U <- U J
    for k in 0..n {
        let xp = u[(k, p)];
        let xq = u[(k, q)];
        u[(k, p)] = xp * jpp + xq * jqp;
        u[(k, q)] = xp * jpq + xq * jqq;
    }
}
