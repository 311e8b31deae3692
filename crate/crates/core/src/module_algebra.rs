//! The concrete Hilbert C*-module `E = M_{p x n}` over `A = M_n`.
//!
//! `<x, y> = x^* y`, the compact operators are `K(E) = M_p` (already unital in
//! finite dimension), and the linking algebra `[[K(E), E], [E^*, A]]` is all of
//! `M_{p+n}`. Standard basis elements of `E` are ordered row-major:
//! `e_m = E_{i,j}` with `m = i * n + j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{eig_hermitian, CMatrix, C64, HERMITIAN_TOL, PSD_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModuleShape {
    pub p: usize,
    pub n: usize,
}

impl ModuleShape {
    pub fn new(p: usize, n: usize) -> Result<Self> {
        if p == 0 || n == 0 {
            return Err(Error::UnsupportedDims(format!("module shape p={p}, n={n}")));
        }
        Ok(Self { p, n })
    }

    /// `dim E = p n`.
    pub fn dim(&self) -> usize {
        self.p * self.n
    }

    /// Size of the linking algebra, `p + n`.
    pub fn linking_dim(&self) -> usize {
        self.p + self.n
    }

    pub fn basis(&self, m: usize) -> CMatrix {
        assert!(m < self.dim(), "basis index {m} out of range");
        CMatrix::unit(self.p, self.n, m / self.n, m % self.n)
    }

    pub fn basis_elements(&self) -> Vec<CMatrix> {
        (0..self.dim()).map(|m| self.basis(m)).collect()
    }

    pub fn check_element(&self, x: &CMatrix) -> Result<()> {
        if x.shape() != (self.p, self.n) {
            return Err(Error::ShapeMismatch(format!(
                "module element is {}x{}, expected {}x{}",
                x.rows(),
                x.cols(),
                self.p,
                self.n
            )));
        }
        Ok(())
    }
}

/// An element of `M_k(E)`: a `k x k` array of module elements.
pub type ModuleMatrix = Vec<Vec<CMatrix>>;

/// `<x, y> = x^* y`.
pub fn inner_product(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch(format!(
            "inner product of {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            y.rows(),
            y.cols()
        )));
    }
    Ok(x.adjoint_mul(y))
}

/// Flatten `X in M_k(E)` to the `kp x kn` block matrix.
pub fn flatten(x: &ModuleMatrix) -> Result<CMatrix> {
    let k = x.len();
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let (p, n) = x[0].first().map(|e| e.shape()).ok_or(Error::EmptyInput)?;
    let mut out = CMatrix::zeros(k * p, k * n);
    for (i, row) in x.iter().enumerate() {
        if row.len() != k {
            return Err(Error::ShapeMismatch(format!("row {i} of M_k(E) has {} entries", row.len())));
        }
        for (j, e) in row.iter().enumerate() {
            if e.shape() != (p, n) {
                return Err(Error::ShapeMismatch(format!("entry ({i},{j}) of M_k(E)")));
            }
            out.set_block(i * p, j * n, e);
        }
    }
    Ok(out)
}

/// Inner product on `M_k(E)`: block `(i, j)` is `sum_s <X_si, Y_sj>`.
pub fn amplify_inner(x: &ModuleMatrix, y: &ModuleMatrix) -> Result<CMatrix> {
    let k = x.len();
    if y.len() != k {
        return Err(Error::ShapeMismatch(format!("M_{k}(E) against M_{}(E)", y.len())));
    }
    let n = x[0].first().map(|e| e.cols()).ok_or(Error::EmptyInput)?;
    let mut out = CMatrix::zeros(k * n, k * n);
    for i in 0..k {
        for j in 0..k {
            let mut acc = CMatrix::zeros(n, n);
            for s in 0..k {
                let (xs, ys) = (x[s].get(i), y[s].get(j));
                let (Some(a), Some(b)) = (xs, ys) else {
                    return Err(Error::ShapeMismatch("ragged M_k(E) element".into()));
                };
                acc = &acc + &inner_product(a, b)?;
            }
            if acc.shape() != (n, n) {
                return Err(Error::ShapeMismatch("inconsistent algebra dimension".into()));
            }
            out.set_block(i * n, j * n, &acc);
        }
    }
    Ok(out)
}

/// Rank-one operator `theta_{x,y} = x y^*` in `K(E) = M_p`.
pub fn theta_op(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.shape() != y.shape() {
        return Err(Error::ShapeMismatch("theta_op operands differ in shape".into()));
    }
    Ok(x.matmul(&y.adjoint()))
}

/// Whether `[[I_p, x], [x^*, a]]` is positive, i.e. `<x, x> <= a`.
pub fn lemma_two_by_two_positive(x: &CMatrix, a: &CMatrix) -> Result<bool> {
    let (p, n) = x.shape();
    if a.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("a is {}x{}, expected {n}x{n}", a.rows(), a.cols())));
    }
    let res = a.hermiticity_residual();
    if res > HERMITIAN_TOL * (1.0 + a.frobenius_norm()) {
        return Err(Error::NotHermitian { residual: res });
    }
    let block = embed_corners(&CMatrix::identity(p), x, x, a);
    let min = eig_hermitian(&block.hermitian_part())?.min();
    Ok(min >= -PSD_TOL * (1.0 + a.frobenius_norm()))
}

/// `[[u, x], [y^*, a]]`, an element of the linking algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkingElement {
    pub u: CMatrix,
    pub x: CMatrix,
    pub y: CMatrix,
    pub a: CMatrix,
}

/// `[[lambda I_p, x], [y^*, a]]`, an element of the operator system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemElement {
    pub lambda: C64,
    pub x: CMatrix,
    pub y: CMatrix,
    pub a: CMatrix,
}

impl LinkingElement {
    pub fn zero(shape: ModuleShape) -> Self {
        let (p, n) = (shape.p, shape.n);
        Self {
            u: CMatrix::zeros(p, p),
            x: CMatrix::zeros(p, n),
            y: CMatrix::zeros(p, n),
            a: CMatrix::zeros(n, n),
        }
    }

    pub fn identity(shape: ModuleShape) -> Self {
        Self { u: CMatrix::identity(shape.p), a: CMatrix::identity(shape.n), ..Self::zero(shape) }
    }

    pub fn shape(&self) -> Result<ModuleShape> {
        let shape = ModuleShape::new(self.u.rows(), self.a.rows())?;
        let ok = self.u.shape() == (shape.p, shape.p)
            && self.x.shape() == (shape.p, shape.n)
            && self.y.shape() == (shape.p, shape.n)
            && self.a.shape() == (shape.n, shape.n);
        if !ok {
            return Err(Error::ShapeMismatch("inconsistent linking element corners".into()));
        }
        Ok(shape)
    }
}

impl SystemElement {
    pub fn to_linking(&self) -> LinkingElement {
        let p = self.x.rows();
        LinkingElement {
            u: CMatrix::identity(p).scale(self.lambda),
            x: self.x.clone(),
            y: self.y.clone(),
            a: self.a.clone(),
        }
    }
}

fn embed_corners(u: &CMatrix, x: &CMatrix, y: &CMatrix, a: &CMatrix) -> CMatrix {
    let (p, n) = (u.rows(), a.rows());
    let mut m = CMatrix::zeros(p + n, p + n);
    m.set_block(0, 0, u);
    m.set_block(0, p, x);
    m.set_block(p, 0, &y.adjoint());
    m.set_block(p, p, a);
    m
}

pub fn embed_linking(el: &LinkingElement) -> Result<CMatrix> {
    el.shape()?;
    Ok(embed_corners(&el.u, &el.x, &el.y, &el.a))
}

pub fn embed_system(el: &SystemElement) -> Result<CMatrix> {
    embed_linking(&el.to_linking())
}

/// Split an `(p+n) x (p+n)` matrix into `(u, x, y, a)` with lower-left `y^*`.
pub fn extract_corners(shape: ModuleShape, m: &CMatrix) -> Result<LinkingElement> {
    let d = shape.linking_dim();
    if m.shape() != (d, d) {
        return Err(Error::ShapeMismatch(format!("expected {d}x{d}, got {}x{}", m.rows(), m.cols())));
    }
    let (p, n) = (shape.p, shape.n);
    Ok(LinkingElement {
        u: m.block(0, 0, p, p),
        x: m.block(0, p, p, n),
        y: m.block(p, 0, n, p).adjoint(),
        a: m.block(p, p, n, n),
    })
}
