use crate::error::{Error, Result};
use crate::matkernel::{CMatrix, ZERO};
use crate::module_algebra::{ModuleMatrix, ModuleShape};

/// A linear map `Phi : E -> B(H1, H2)`, stored as a `(d2 d1) x (p n)` matrix
/// whose column `m` is the row-major vectorization of `Phi(e_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModuleMap {
    shape: ModuleShape,
    d1: usize,
    d2: usize,
    mat: CMatrix,
}

impl ModuleMap {
    pub fn new(shape: ModuleShape, d1: usize, d2: usize, mat: CMatrix) -> Result<Self> {
        if mat.shape() != (d2 * d1, shape.dim()) {
            return Err(Error::ShapeMismatch(format!(
                "module map matrix is {}x{}, expected {}x{}",
                mat.rows(),
                mat.cols(),
                d2 * d1,
                shape.dim()
            )));
        }
        Ok(Self { shape, d1, d2, mat })
    }

    pub fn from_images(shape: ModuleShape, d1: usize, d2: usize, images: &[CMatrix]) -> Result<Self> {
        if images.len() != shape.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{} basis images for dim E = {}",
                images.len(),
                shape.dim()
            )));
        }
        let mut mat = CMatrix::zeros(d2 * d1, shape.dim());
        for (m, img) in images.iter().enumerate() {
            if img.shape() != (d2, d1) {
                return Err(Error::ShapeMismatch(format!(
                    "image of e_{m} is {}x{}, expected {d2}x{d1}",
                    img.rows(),
                    img.cols()
                )));
            }
            mat.set_block(0, m, &img.vectorize());
        }
        Ok(Self { shape, d1, d2, mat })
    }

    pub fn from_fn(shape: ModuleShape, d1: usize, d2: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let images: Vec<CMatrix> = shape.basis_elements().iter().map(f).collect();
        Self::from_images(shape, d1, d2, &images)
    }

    pub fn zero(shape: ModuleShape, d1: usize, d2: usize) -> Self {
        Self { shape, d1, d2, mat: CMatrix::zeros(d2 * d1, shape.dim()) }
    }

    /// `x -> W^* Psi(x) V`.
    pub fn compress(psi: &ModuleMap, w: &CMatrix, v: &CMatrix) -> Result<Self> {
        if w.rows() != psi.d2 || v.rows() != psi.d1 {
            return Err(Error::ShapeMismatch(format!(
                "compressing B(C^{}, C^{}) by W {}x{} and V {}x{}",
                psi.d1,
                psi.d2,
                w.rows(),
                w.cols(),
                v.rows(),
                v.cols()
            )));
        }
        let images: Vec<CMatrix> =
            psi.images().iter().map(|img| w.adjoint_mul(&img.matmul(v))).collect();
        Self::from_images(psi.shape, v.cols(), w.cols(), &images)
    }

    pub fn shape(&self) -> ModuleShape {
        self.shape
    }

    /// Dimension of the source space `H1`.
    pub fn d1(&self) -> usize {
        self.d1
    }

    /// Dimension of the target space `H2`.
    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// `Phi(e_m)` as a `d2 x d1` matrix.
    pub fn image(&self, m: usize) -> CMatrix {
        CMatrix::from_fn(self.d2, self.d1, |a, b| self.mat[(a * self.d1 + b, m)])
    }

    pub fn images(&self) -> Vec<CMatrix> {
        (0..self.shape.dim()).map(|m| self.image(m)).collect()
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.shape.check_element(x)?;
        let mut out = CMatrix::zeros(self.d2, self.d1);
        for m in 0..self.shape.dim() {
            let c = x[(m / self.shape.n, m % self.shape.n)];
            if c == ZERO {
                continue;
            }
            for a in 0..self.d2 {
                for b in 0..self.d1 {
                    out[(a, b)] += c * self.mat[(a * self.d1 + b, m)];
                }
            }
        }
        Ok(out)
    }

    /// `Phi_k(X)`: apply entrywise to `X in M_k(E)`.
    pub fn apply_amplified(&self, x: &ModuleMatrix) -> Result<CMatrix> {
        let k = x.len();
        let mut out = CMatrix::zeros(k * self.d2, k * self.d1);
        for (i, row) in x.iter().enumerate() {
            if row.len() != k {
                return Err(Error::ShapeMismatch("ragged M_k(E) element".into()));
            }
            for (j, e) in row.iter().enumerate() {
                out.set_block(i * self.d2, j * self.d1, &self.apply(e)?);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { mat: self.mat.scale_real(s), ..self.clone() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if (self.shape, self.d1, self.d2) != (other.shape, other.d1, other.d2) {
            return Err(Error::ShapeMismatch("module maps with different dimensions".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { mat: &self.mat + &other.mat, ..self.clone() })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self { mat: &self.mat - &other.mat, ..self.clone() })
    }

    /// Largest entrywise deviation from `other` over the basis images.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.mat.max_abs_diff(&other.mat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernel::random::random_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn apply_is_linear_extension_of_images() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let shape = ModuleShape::new(2, 3).unwrap();
        let images: Vec<CMatrix> = (0..6).map(|_| random_matrix(&mut rng, 2, 4)).collect();
        let phi = ModuleMap::from_images(shape, 4, 2, &images).unwrap();
        for (m, img) in images.iter().enumerate() {
            assert_eq!(&phi.image(m), img);
            assert_eq!(&phi.apply(&shape.basis(m)).unwrap(), img);
        }
        let x = random_matrix(&mut rng, 2, 3);
        let mut expected = CMatrix::zeros(2, 4);
        for (m, img) in images.iter().enumerate() {
            expected = &expected + &img.scale(x[(m / 3, m % 3)]);
        }
        assert!(phi.apply(&x).unwrap().max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        let shape = ModuleShape::new(1, 1).unwrap();
        assert!(ModuleMap::new(shape, 2, 2, CMatrix::zeros(3, 1)).is_err());
        let phi = ModuleMap::zero(shape, 1, 1);
        assert!(phi.apply(&CMatrix::zeros(2, 1)).is_err());
    }
}
