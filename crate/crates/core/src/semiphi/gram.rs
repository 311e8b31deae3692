use serde::{Deserialize, Serialize};

use super::ModuleMap;
use crate::cp_maps::CpMap;
use crate::error::{Error, Result};
use crate::matkernel::{eig_hermitian, CMatrix};
use crate::module_algebra::{amplify_inner, ModuleMatrix, ModuleShape};

pub(crate) fn check_pair(phi_big: &ModuleMap, phi: &CpMap) -> Result<()> {
    if phi.dom_dim() != phi_big.shape().n || phi.cod_dim() != phi_big.d1() {
        return Err(Error::ShapeMismatch(format!(
            "phi maps M_{} -> M_{}, module map needs M_{} -> M_{}",
            phi.dom_dim(),
            phi.cod_dim(),
            phi_big.shape().n,
            phi_big.d1()
        )));
    }
    Ok(())
}

/// `phi_k(<X,X>) - Phi_k(X)^* Phi_k(X)` for `X in M_k(E)`.
pub fn defect_level(phi_big: &ModuleMap, phi: &CpMap, x: &ModuleMatrix) -> Result<CMatrix> {
    check_pair(phi_big, phi)?;
    let k = x.len();
    let inner = amplify_inner(x, x)?;
    let n = phi_big.shape().n;
    let d1 = phi_big.d1();
    let mut lhs = CMatrix::zeros(k * d1, k * d1);
    for i in 0..k {
        for j in 0..k {
            let blk = inner.block(i * n, j * n, n, n);
            lhs.set_block(i * d1, j * d1, &phi.apply(&blk)?);
        }
    }
    let img = phi_big.apply_amplified(x)?;
    Ok((&lhs - &img.adjoint_mul(&img)).hermitian_part())
}

/// An element of `M_k(E)` with only its first row populated, together with a
/// vector `probe` in `C^(k d1)` on which the defect is negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub level: usize,
    pub row: Vec<CMatrix>,
    pub probe: CMatrix,
}

impl Witness {
    pub fn element(&self) -> ModuleMatrix {
        let (p, n) = self.row.first().map(|e| e.shape()).unwrap_or((0, 0));
        (0..self.level)
            .map(|i| {
                if i == 0 {
                    self.row.clone()
                } else {
                    vec![CMatrix::zeros(p, n); self.level]
                }
            })
            .collect()
    }

    /// `<probe, defect probe>`; equals the Gram eigenvalue the witness came from.
    pub fn defect_value(&self, phi_big: &ModuleMap, phi: &CpMap) -> Result<f64> {
        let d = defect_level(phi_big, phi, &self.element())?;
        Ok(self.probe.adjoint_mul(&d.matmul(&self.probe))[(0, 0)].re)
    }
}

#[derive(Clone, Debug)]
pub struct GramKernel {
    pub matrix: CMatrix,
    pub min_eig: f64,
    /// Unit eigenvector for `min_eig`.
    pub min_vector: CMatrix,
}

impl GramKernel {
    /// PSD at the relative threshold `1e-9 (1 + |G|)`.
    pub fn is_psd(&self) -> bool {
        self.min_eig >= -crate::matkernel::PSD_TOL * (1.0 + self.matrix.frobenius_norm())
    }
}

/// Gram matrix of the kernel `(x, y) -> phi(<x,y>) - Phi(x)^* Phi(y)` over the
/// standard basis of `E`; block `(m, l)` is `d1 x d1`.
pub fn gram_kernel(phi_big: &ModuleMap, phi: &CpMap) -> Result<GramKernel> {
    check_pair(phi_big, phi)?;
    let ModuleShape { p, n } = phi_big.shape();
    let d1 = phi_big.d1();
    let dim = p * n;
    let images = phi_big.images();
    let mut g = CMatrix::zeros(dim * d1, dim * d1);
    for m in 0..dim {
        let (i, j) = (m / n, m % n);
        for l in 0..dim {
            let (k, q) = (l / n, l % n);
            let mut blk = if i == k { phi.unit_image(j, q) } else { CMatrix::zeros(d1, d1) };
            blk = &blk - &images[m].adjoint_mul(&images[l]);
            g.set_block(m * d1, l * d1, &blk);
        }
    }
    let g = g.hermitian_part();
    let eig = eig_hermitian(&g)?;
    let min_vector = if eig.values.is_empty() { CMatrix::zeros(0, 1) } else { eig.vectors.col(0) };
    Ok(GramKernel { min_eig: eig.min(), matrix: g, min_vector })
}

/// Fold a Gram vector `c = (c_{m,h})` into a first-row witness. Uses the level
/// `min(d1, p n)`: either `x_h = sum_m c_{m,h} e_m` probed by `sum_h e_h (x) f_h`,
/// or the basis row `(e_1, ..., e_pn)` probed by `c` itself.
pub fn fold_witness(shape: ModuleShape, d1: usize, c: &CMatrix) -> Witness {
    let dim = shape.dim();
    if d1 <= dim {
        let row: Vec<CMatrix> = (0..d1)
            .map(|h| {
                let mut x = CMatrix::zeros(shape.p, shape.n);
                for m in 0..dim {
                    x[(m / shape.n, m % shape.n)] = c[(m * d1 + h, 0)];
                }
                x
            })
            .collect();
        let mut probe = CMatrix::zeros(d1 * d1, 1);
        for h in 0..d1 {
            probe[(h * d1 + h, 0)] = crate::matkernel::ONE;
        }
        Witness { level: d1, row, probe }
    } else {
        let row = shape.basis_elements();
        Witness { level: dim, row, probe: c.clone() }
    }
}
