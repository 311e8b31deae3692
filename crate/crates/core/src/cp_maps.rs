//! Linear maps `M_m -> M_d` stored by their Choi matrix.
//!
//! The Choi matrix is `C = sum_ij E_ij ⊗ f(E_ij)`, an `(m d) x (m d)` matrix
//! whose `(i, j)` block of size `d x d` is `f(E_ij)`. Kraus operators and the
//! minimal Stinespring dilation are derived from it on demand.

use crate::error::{Error, Result};
use crate::matkernel::{
    eig_hermitian, orthonormal_range, psd_project, psd_threshold, CMatrix, HERMITIAN_TOL, RANK_TOL, ZERO,
};

/// Relative eigenvalue cutoff defining the Kraus rank.
pub const KRAUS_RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CpMap {
    dom: usize,
    cod: usize,
    choi: CMatrix,
}

/// Outcome of the Choi positivity test.
#[derive(Clone, Debug)]
pub struct CpTest {
    pub is_cp: bool,
    pub min_eig: f64,
    /// Eigenvector of the smallest Choi eigenvalue.
    pub witness: CMatrix,
}

impl CpMap {
    pub fn from_choi(dom: usize, cod: usize, choi: CMatrix) -> Result<Self> {
        if choi.shape() != (dom * cod, dom * cod) {
            return Err(Error::ShapeMismatch(format!(
                "Choi matrix {}x{} for a map M_{dom} -> M_{cod}",
                choi.rows(),
                choi.cols()
            )));
        }
        Ok(Self { dom, cod, choi })
    }

    pub fn from_fn(dom: usize, cod: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let mut choi = CMatrix::zeros(dom * cod, dom * cod);
        for i in 0..dom {
            for j in 0..dom {
                let img = f(&CMatrix::unit(dom, dom, i, j));
                assert_eq!(img.shape(), (cod, cod), "from_fn: image has wrong shape");
                choi.set_block(i * cod, j * cod, &img);
            }
        }
        Self { dom, cod, choi }
    }

    /// `X -> sum_k K_k X K_k^*` for `d x m` operators `K_k`.
    pub fn from_kraus(dom: usize, cod: usize, ops: &[CMatrix]) -> Result<Self> {
        for k in ops {
            if k.shape() != (cod, dom) {
                return Err(Error::ShapeMismatch(format!(
                    "Kraus operator {}x{}, expected {cod}x{dom}",
                    k.rows(),
                    k.cols()
                )));
            }
        }
        Ok(Self::from_fn(dom, cod, |x| {
            let mut acc = CMatrix::zeros(cod, cod);
            for k in ops {
                acc = &acc + &k.matmul(x).matmul(&k.adjoint());
            }
            acc
        }))
    }

    pub fn identity(m: usize) -> Self {
        Self::from_fn(m, m, |x| x.clone())
    }

    pub fn transpose_map(m: usize) -> Self {
        Self::from_fn(m, m, |x| x.transpose())
    }

    pub fn trace_map(m: usize) -> Self {
        Self::from_fn(m, 1, |x| CMatrix::from_rows(&[&[x.trace()]]))
    }

    /// `a -> tr(a) / d * I_d`.
    pub fn depolarizing(d: usize) -> Self {
        Self::from_fn(d, d, |x| CMatrix::identity(d).scale(x.trace() / d as f64))
    }

    /// `a -> v^* a v` for an `m x d` operator `v`.
    pub fn compression(v: &CMatrix) -> Self {
        let (m, d) = v.shape();
        Self::from_fn(m, d, |x| v.adjoint_mul(&x.matmul(v)))
    }

    pub fn zero(dom: usize, cod: usize) -> Self {
        Self { dom, cod, choi: CMatrix::zeros(dom * cod, dom * cod) }
    }

    pub fn dom_dim(&self) -> usize {
        self.dom
    }

    pub fn cod_dim(&self) -> usize {
        self.cod
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// `f(E_ij)`.
    pub fn unit_image(&self, i: usize, j: usize) -> CMatrix {
        self.choi.block(i * self.cod, j * self.cod, self.cod, self.cod)
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.shape() != (self.dom, self.dom) {
            return Err(Error::ShapeMismatch(format!(
                "applying M_{} -> M_{} map to a {}x{} matrix",
                self.dom,
                self.cod,
                x.rows(),
                x.cols()
            )));
        }
        let d = self.cod;
        let mut out = CMatrix::zeros(d, d);
        for i in 0..self.dom {
            for j in 0..self.dom {
                let c = x[(i, j)];
                if c == ZERO {
                    continue;
                }
                for a in 0..d {
                    for b in 0..d {
                        out[(a, b)] += c * self.choi[(i * d + a, j * d + b)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dom: self.dom, cod: self.cod, choi: self.choi.scale_real(s) }
    }

    fn check_same_dims(&self, other: &Self) -> Result<()> {
        if (self.dom, self.cod) != (other.dom, other.cod) {
            return Err(Error::ShapeMismatch(format!(
                "maps M_{} -> M_{} and M_{} -> M_{}",
                self.dom, self.cod, other.dom, other.cod
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self { dom: self.dom, cod: self.cod, choi: &self.choi + &other.choi })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_dims(other)?;
        Ok(Self { dom: self.dom, cod: self.cod, choi: &self.choi - &other.choi })
    }

    /// Largest deviation `|f(I) - I|`.
    pub fn unitality_residual(&self) -> f64 {
        let img = self.apply(&CMatrix::identity(self.dom)).expect("square identity");
        if self.dom == 0 {
            return 0.0;
        }
        img.max_abs_diff(&CMatrix::identity(self.cod))
    }

    pub fn is_unital(&self, tol: f64) -> bool {
        self.unitality_residual() <= tol
    }

    pub fn is_cp(&self) -> Result<CpTest> {
        let res = self.choi.hermiticity_residual();
        if res > HERMITIAN_TOL * (1.0 + self.choi.frobenius_norm()) {
            return Err(Error::NotHermitian { residual: res });
        }
        if self.choi.rows() == 0 {
            return Ok(CpTest { is_cp: true, min_eig: 0.0, witness: CMatrix::zeros(0, 1) });
        }
        let e = eig_hermitian(&self.choi)?;
        Ok(CpTest {
            is_cp: e.min() >= psd_threshold(&self.choi),
            min_eig: e.min(),
            witness: e.vectors.col(0),
        })
    }

    fn require_cp(&self) -> Result<()> {
        let t = self.is_cp()?;
        if !t.is_cp {
            return Err(Error::NotCp { min_eig: t.min_eig });
        }
        Ok(())
    }

    /// `id_{M_k} ⊗ f` acting on `M_k(M_m) = M_{km}`.
    pub fn amplify(&self, k: usize) -> Self {
        let (m, d) = (self.dom, self.cod);
        let mut choi = CMatrix::zeros(k * m * k * d, k * m * k * d);
        for s in 0..k {
            for t in 0..k {
                for i in 0..m {
                    for j in 0..m {
                        // image of E_{(s,i),(t,j)} is E_st ⊗ f(E_ij)
                        let img = self.unit_image(i, j);
                        let row = (s * m + i) * k * d + s * d;
                        let col = (t * m + j) * k * d + t * d;
                        choi.set_block(row, col, &img);
                    }
                }
            }
        }
        Self { dom: k * m, cod: k * d, choi }
    }

    /// Kraus operators `K_k` (`d x m`) with `f(X) = sum_k K_k X K_k^*`.
    ///
    /// One operator per Choi eigenvalue above `KRAUS_RANK_TOL * lambda_max`.
    pub fn kraus(&self) -> Result<Vec<CMatrix>> {
        self.require_cp()?;
        if self.choi.rows() == 0 {
            return Ok(Vec::new());
        }
        let e = eig_hermitian(&self.choi)?;
        let lmax = e.max();
        let (m, d) = (self.dom, self.cod);
        let mut ops = Vec::new();
        for k in (0..e.values.len()).rev() {
            let lam = e.values[k];
            if lmax <= 0.0 || lam <= KRAUS_RANK_TOL * lmax {
                continue;
            }
            let w = lam.sqrt();
            ops.push(CMatrix::from_fn(d, m, |a, i| e.vectors[(i * d + a, k)] * w));
        }
        Ok(ops)
    }

    /// Minimal Stinespring dilation `f(X) = V^* (X ⊗ I_r) V`.
    pub fn stinespring_minimal(&self) -> Result<Stinespring> {
        let ops = self.kraus()?;
        let (m, d) = (self.dom, self.cod);
        let r = ops.len();
        let mut v = CMatrix::zeros(m * r, d);
        for (k, op) in ops.iter().enumerate() {
            for a in 0..m {
                for b in 0..d {
                    v[(a * r + k, b)] = op[(b, a)].conj();
                }
            }
        }
        Ok(Stinespring { dom: m, multiplicity: r, v })
    }

    /// The map whose Choi matrix is the PSD part of this one.
    pub fn psd_part(&self) -> Result<Self> {
        if self.choi.rows() == 0 {
            return Ok(self.clone());
        }
        Ok(Self { dom: self.dom, cod: self.cod, choi: psd_project(&self.choi.hermitian_part())? })
    }

    /// `f <= g` in the CP order, i.e. `g - f` is CP.
    pub fn cp_leq(&self, other: &Self) -> Result<bool> {
        let diff = other.sub(self)?;
        Ok(diff.is_cp()?.is_cp)
    }
}

/// `f(X) = V^* (X ⊗ I_r) V` with `V : C^d -> C^m ⊗ C^r`.
#[derive(Clone, Debug)]
pub struct Stinespring {
    pub dom: usize,
    pub multiplicity: usize,
    pub v: CMatrix,
}

impl Stinespring {
    pub fn dilation_dim(&self) -> usize {
        self.dom * self.multiplicity
    }

    pub fn represent(&self, x: &CMatrix) -> CMatrix {
        x.kron(&CMatrix::identity(self.multiplicity))
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        self.v.adjoint_mul(&self.represent(x).matmul(&self.v))
    }

    /// Whether `span{(X ⊗ I_r) V h}` over matrix units `X` and basis vectors `h`
    /// fills the dilation space.
    pub fn is_minimal(&self) -> Result<bool> {
        let k = self.dilation_dim();
        if k == 0 {
            return Ok(true);
        }
        let mut cols = Vec::new();
        for i in 0..self.dom {
            for j in 0..self.dom {
                cols.push(self.represent(&CMatrix::unit(self.dom, self.dom, i, j)).matmul(&self.v));
            }
        }
        let q = orthonormal_range(&CMatrix::hstack(&cols), RANK_TOL)?;
        Ok(q.cols() == k)
    }
}
