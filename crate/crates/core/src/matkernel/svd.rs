//! One-sided (Hestenes) Jacobi SVD.

use super::cmatrix::{CMatrix, C64, ZERO};

const MAX_SWEEPS: usize = 100;
// Below this the phase `gamma / |gamma|` loses its unit modulus.
const TINY: f64 = f64::MIN_POSITIVE / f64::EPSILON;

/// Thin SVD `A = U diag(sigma) V^*`, singular values descending.
///
/// For an `m x n` input `U` is `m x k` and `V` is `n x k` with
/// `k = min(m, n)`. Columns of `U` belonging to zero singular values are zero.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = svd_tall(&a.adjoint());
        return Svd { u: t.v, sigma: t.sigma, v: t.u };
    }
    svd_tall(a)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    svd(a).sigma
}

fn svd_tall(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    // Columns kept as separate vectors for cache-friendly rotations.
    let mut g: Vec<Vec<C64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { C64::new(1.0, 0.0) } else { ZERO }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = g[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = g[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = g[p].iter().zip(&g[q]).map(|(x, y)| x.conj() * y).sum();
                let gn = gamma.norm();
                if gn < TINY || gn <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma.conj() / gn;
                let zeta = (beta - alpha) / (2.0 * gn);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    let sgn = if zeta >= 0.0 { 1.0 } else { -1.0 };
                    sgn / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut g, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    let cp = &mut lo[p];
                    let cq = &mut hi[0];
                    for (xp, xq) in cp.iter_mut().zip(cq.iter_mut()) {
                        let yq = *xq * phase;
                        let yp = *xp;
                        *xp = yp * c - yq * s;
                        *xq = yp * s + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> =
        g.iter().map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = CMatrix::zeros(m, n);
    let mut vm = CMatrix::zeros(n, n);
    let mut sigma = Vec::with_capacity(n);
    for (k, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..m {
                u[(i, k)] = g[j][i] / s;
            }
        }
        for i in 0..n {
            vm[(i, k)] = v[j][i];
        }
    }
    Svd { u, sigma, v: vm }
}
