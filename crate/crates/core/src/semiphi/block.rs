//! The block map `[[psi, Phi], [Phi^*, phi]]` on the linking algebra.
//!
//! Codomain ordering is `H2 ⊕ H1`. Only the Choi entries indexed by
//! `(P ⊗ H2) ⊕ (A ⊗ H1)` can be nonzero; that principal submatrix is the
//! "reduced" Choi matrix `[[C_psi, B], [B^*, C_phi]]` the solver works on.

use super::gram::check_pair;
use super::ModuleMap;
use crate::cp_maps::CpMap;
use crate::error::{Error, Result};
use crate::matkernel::CMatrix;
use crate::module_algebra::ModuleShape;

/// Full Choi indices of the reduced coordinates, in reduced order.
pub(crate) fn reduced_indices(shape: ModuleShape, d1: usize, d2: usize) -> Vec<usize> {
    let dd = d1 + d2;
    let mut idx = Vec::with_capacity(shape.p * d2 + shape.n * d1);
    for i in 0..shape.p {
        idx.extend((0..d2).map(|a| i * dd + a));
    }
    for j in 0..shape.n {
        idx.extend((0..d1).map(|b| (shape.p + j) * dd + d2 + b));
    }
    idx
}

/// Off-diagonal block `B` with `B[(i d2 + a), (j d1 + b)] = Phi(e_ij)[a, b]`.
pub(crate) fn coupling_block(phi_big: &ModuleMap) -> CMatrix {
    let ModuleShape { p, n } = phi_big.shape();
    let (d1, d2) = (phi_big.d1(), phi_big.d2());
    let mat = phi_big.matrix();
    CMatrix::from_fn(p * d2, n * d1, |r, c| {
        let (i, a) = (r / d2, r % d2);
        let (j, b) = (c / d1, c % d1);
        mat[(a * d1 + b, i * n + j)]
    })
}

pub(crate) fn reduced_choi(c_psi: &CMatrix, b: &CMatrix, c_phi: &CMatrix) -> CMatrix {
    let (ra, rb) = (c_psi.rows(), c_phi.rows());
    let mut z = CMatrix::zeros(ra + rb, ra + rb);
    z.set_block(0, 0, c_psi);
    z.set_block(0, ra, b);
    z.set_block(ra, 0, &b.adjoint());
    z.set_block(ra, ra, c_phi);
    z
}

pub(crate) fn expand_reduced(shape: ModuleShape, d1: usize, d2: usize, z: &CMatrix) -> CMatrix {
    let idx = reduced_indices(shape, d1, d2);
    let full = shape.linking_dim() * (d1 + d2);
    let mut c = CMatrix::zeros(full, full);
    for (r, &fr) in idx.iter().enumerate() {
        for (s, &fs) in idx.iter().enumerate() {
            c[(fr, fs)] = z[(r, s)];
        }
    }
    c
}

#[cfg(test)]
pub(crate) fn restrict_full(shape: ModuleShape, d1: usize, d2: usize, c: &CMatrix) -> CMatrix {
    let idx = reduced_indices(shape, d1, d2);
    CMatrix::from_fn(idx.len(), idx.len(), |r, s| c[(idx[r], idx[s])])
}

pub(crate) fn check_psi(psi: &CpMap, phi_big: &ModuleMap) -> Result<()> {
    if psi.dom_dim() != phi_big.shape().p || psi.cod_dim() != phi_big.d2() {
        return Err(Error::ShapeMismatch(format!(
            "psi maps M_{} -> M_{}, block needs M_{} -> M_{}",
            psi.dom_dim(),
            psi.cod_dim(),
            phi_big.shape().p,
            phi_big.d2()
        )));
    }
    Ok(())
}

/// `Theta([[u, x], [y^*, a]]) = [[psi(u), Phi(x)], [Phi(y)^*, phi(a)]]`.
pub fn assemble_block(psi: &CpMap, phi_big: &ModuleMap, phi: &CpMap) -> Result<CpMap> {
    check_pair(phi_big, phi)?;
    check_psi(psi, phi_big)?;
    let shape = phi_big.shape();
    let (d1, d2) = (phi_big.d1(), phi_big.d2());
    let z = reduced_choi(psi.choi(), &coupling_block(phi_big), phi.choi());
    CpMap::from_choi(shape.linking_dim(), d1 + d2, expand_reduced(shape, d1, d2, &z))
}

/// Split `Theta` back into `(psi, Phi, phi)`.
pub fn split_block(theta: &CpMap, shape: ModuleShape, d1: usize, d2: usize) -> Result<(CpMap, ModuleMap, CpMap)> {
    let (p, n) = (shape.p, shape.n);
    if theta.dom_dim() != p + n || theta.cod_dim() != d1 + d2 {
        return Err(Error::ShapeMismatch("block map dimensions".into()));
    }
    let corner = |i: usize, j: usize| theta.unit_image(i, j);
    let psi = CpMap::from_fn(p, d2, |u| {
        let mut out = CMatrix::zeros(d2, d2);
        for i in 0..p {
            for j in 0..p {
                out = &out + &corner(i, j).block(0, 0, d2, d2).scale(u[(i, j)]);
            }
        }
        out
    });
    let phi = CpMap::from_fn(n, d1, |a| {
        let mut out = CMatrix::zeros(d1, d1);
        for i in 0..n {
            for j in 0..n {
                out = &out + &corner(p + i, p + j).block(d2, d2, d1, d1).scale(a[(i, j)]);
            }
        }
        out
    });
    let images: Vec<CMatrix> =
        (0..p * n).map(|m| corner(m / n, p + m % n).block(0, d2, d2, d1)).collect();
    let big = ModuleMap::from_images(shape, d1, d2, &images)?;
    Ok((psi, big, phi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::random::random_matrix;
    use crate::module_algebra::{embed_linking, LinkingElement};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_cp(rng: &mut ChaCha8Rng, m: usize, d: usize) -> CpMap {
        let ops: Vec<CMatrix> = (0..2).map(|_| random_matrix(rng, d, m)).collect();
        CpMap::from_kraus(m, d, &ops).unwrap()
    }

    #[test]
    fn scalar_identity_model() {
        let shape = ModuleShape::new(1, 1).unwrap();
        let id = CpMap::identity(1);
        let big = ModuleMap::new(shape, 1, 1, CMatrix::identity(1)).unwrap();
        let theta = assemble_block(&id, &big, &id).unwrap();
        assert_eq!(theta.choi(), CpMap::identity(2).choi());
    }

    #[test]
    fn zero_coupling_is_block_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shape = ModuleShape::new(2, 2).unwrap();
        let psi = random_cp(&mut rng, 2, 2);
        let phi = random_cp(&mut rng, 2, 3);
        let theta = assemble_block(&psi, &ModuleMap::zero(shape, 3, 2), &phi).unwrap();
        assert!(theta.is_cp().unwrap().is_cp);
        let neg = psi.scale(-1.0);
        let theta = assemble_block(&neg, &ModuleMap::zero(shape, 3, 2), &phi).unwrap();
        assert!(!theta.is_cp().unwrap().is_cp);
    }

    #[test]
    fn corners_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (p, n, d1, d2) in [(1, 1, 1, 1), (2, 3, 2, 1), (3, 2, 1, 3), (2, 2, 3, 2)] {
            let shape = ModuleShape::new(p, n).unwrap();
            let psi = random_cp(&mut rng, p, d2);
            let phi = random_cp(&mut rng, n, d1);
            let images: Vec<CMatrix> = (0..p * n).map(|_| random_matrix(&mut rng, d2, d1)).collect();
            let big = ModuleMap::from_images(shape, d1, d2, &images).unwrap();
            let theta = assemble_block(&psi, &big, &phi).unwrap();
            let el = LinkingElement {
                u: random_matrix(&mut rng, p, p),
                x: random_matrix(&mut rng, p, n),
                y: random_matrix(&mut rng, p, n),
                a: random_matrix(&mut rng, n, n),
            };
            let out = theta.apply(&embed_linking(&el).unwrap()).unwrap();
            let tol = 1e-12;
            assert!(out.block(0, 0, d2, d2).max_abs_diff(&psi.apply(&el.u).unwrap()) < tol);
            assert!(out.block(0, d2, d2, d1).max_abs_diff(&big.apply(&el.x).unwrap()) < tol);
            assert!(out.block(d2, 0, d1, d2).max_abs_diff(&big.apply(&el.y).unwrap().adjoint()) < tol);
            assert!(out.block(d2, d2, d1, d1).max_abs_diff(&phi.apply(&el.a).unwrap()) < tol);
            let (psi2, big2, phi2) = split_block(&theta, shape, d1, d2).unwrap();
            assert!(psi2.choi().max_abs_diff(psi.choi()) < tol);
            assert!(phi2.choi().max_abs_diff(phi.choi()) < tol);
            assert!(big2.max_abs_diff(&big) < tol);
            let z = restrict_full(shape, d1, d2, theta.choi());
            assert_eq!(expand_reduced(shape, d1, d2, &z), *theta.choi());
        }
    }
}
