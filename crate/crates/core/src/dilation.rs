//! Dilation pairs `((rho, K1, V), (Psi, K2, W))` with `Phi(x) = W^* Psi(x) V`
//! and `phi(a) = V^* rho(a) V`, their minimization and uniqueness.

use crate::cp_maps::CpMap;
use crate::error::{Error, Result};
use crate::matkernel::{
    orthonormal_range, polar_unitary, psd_sqrt, pseudo_inverse, solve_lstsq, CMatrix, LSTSQ_RCOND, RANK_TOL,
};
use crate::module_algebra::ModuleShape;
use crate::semiphi::{certify, schur_extension, ModuleMap, SolverOptions, Verdict};

/// Multiplicativity tolerance for representations.
pub const REPRESENTATION_TOL: f64 = 1e-8;

/// Accepted reconstruction residual of a pair handed to [`minimize`].
pub const PAIR_TOL: f64 = 1e-6;

/// Gram mismatch above which two pairs are declared inequivalent.
pub const EQUIVALENCE_TOL: f64 = 1e-6;

/// `X -> X ⊗ I_r` on `M_m`, as a map into `M_{m r}`.
pub fn ampliation(m: usize, r: usize) -> CpMap {
    let ir = CMatrix::identity(r);
    CpMap::from_fn(m, m * r, |x| x.kron(&ir))
}

/// `X -> Q^* pi(X) Q`.
pub fn compress_map(pi: &CpMap, q: &CMatrix) -> CpMap {
    let m = pi.dom_dim();
    let mut choi = CMatrix::zeros(m * q.cols(), m * q.cols());
    for i in 0..m {
        for j in 0..m {
            choi.set_block(i * q.cols(), j * q.cols(), &q.adjoint_mul(&pi.unit_image(i, j).matmul(q)));
        }
    }
    CpMap::from_choi(m, q.cols(), choi).expect("consistent shapes")
}

/// Largest violation of `pi(E_ij) pi(E_kl) = delta_jk pi(E_il)`,
/// `pi(E_ij)^* = pi(E_ji)` and `pi(I) = I` over matrix units.
pub fn representation_residual(pi: &CpMap) -> f64 {
    let m = pi.dom_dim();
    let k = pi.cod_dim();
    let mut worst: f64 = 0.0;
    let mut unit = CMatrix::zeros(k, k);
    for i in 0..m {
        unit = &unit + &pi.unit_image(i, i);
        for j in 0..m {
            let eij = pi.unit_image(i, j);
            worst = worst.max(eij.adjoint().max_abs_diff(&pi.unit_image(j, i)));
            for l in 0..m {
                let prod = eij.matmul(&pi.unit_image(j, l));
                worst = worst.max(prod.max_abs_diff(&pi.unit_image(i, l)));
                for q in 0..m {
                    if q != j {
                        worst = worst.max(pi.unit_image(i, q).matmul(&pi.unit_image(j, l)).max_abs());
                    }
                }
            }
        }
    }
    worst.max(unit.max_abs_diff(&CMatrix::identity(k)))
}

/// Orthonormal basis of the column span; `dim x 0` for an empty or zero family.
pub(crate) fn span_basis(family: &CMatrix) -> Result<CMatrix> {
    if family.cols() == 0 || family.max_abs() == 0.0 {
        return Ok(CMatrix::zeros(family.rows(), 0));
    }
    let q = orthonormal_range(family, RANK_TOL)?;
    Ok(q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DilationPair {
    pub shape: ModuleShape,
    /// Unital representation `M_n -> B(K1)`.
    pub rho: CpMap,
    /// `K1 x d1`.
    pub v: CMatrix,
    /// `E -> B(K1, K2)`.
    pub psi: ModuleMap,
    /// `K2 x d2`.
    pub w: CMatrix,
}

/// Residuals of a pair against the instance it dilates.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PairResiduals {
    pub module_map: f64,
    pub cp_map: f64,
    pub rho_multiplicative: f64,
    pub psi_rho_map: f64,
    pub w_isometry: f64,
    pub w_coisometry: f64,
    pub v_isometry: f64,
}

impl DilationPair {
    /// The same pair in new bases: `K1` rotated by `u1`, `K2` by `u2`.
    pub fn conjugated(&self, u1: &CMatrix, u2: &CMatrix) -> Result<Self> {
        if u1.shape() != (self.k1(), self.k1()) || u2.shape() != (self.k2(), self.k2()) {
            return Err(Error::ShapeMismatch("conjugating unitaries must act on K1 and K2".into()));
        }
        let rho = CpMap::from_fn(self.shape.n, self.k1(), |a| {
            u1.matmul(&self.rho.apply(a).expect("square")).matmul(&u1.adjoint())
        });
        let psi = ModuleMap::from_fn(self.shape, self.k1(), self.k2(), |x| {
            u2.matmul(&self.psi.apply(x).expect("module element")).matmul(&u1.adjoint())
        })?;
        Ok(Self { shape: self.shape, rho, v: u1.matmul(&self.v), psi, w: u2.matmul(&self.w) })
    }

    pub fn k1(&self) -> usize {
        self.v.rows()
    }

    pub fn k2(&self) -> usize {
        self.w.rows()
    }

    pub fn d1(&self) -> usize {
        self.v.cols()
    }

    pub fn d2(&self) -> usize {
        self.w.cols()
    }

    /// `sigma(E_ij) = Psi(e_i1) Psi(e_j1)^*`, the representation of `K(E)` on `K2`.
    pub fn sigma(&self) -> CpMap {
        let n = self.shape.n;
        let imgs: Vec<CMatrix> = (0..self.shape.p).map(|i| self.psi.image(i * n)).collect();
        CpMap::from_fn(self.shape.p, self.k2(), |u| {
            let mut out = CMatrix::zeros(self.k2(), self.k2());
            for (i, a) in imgs.iter().enumerate() {
                for (j, b) in imgs.iter().enumerate() {
                    if u[(i, j)] != crate::matkernel::ZERO {
                        out = &out + &a.matmul(&b.adjoint()).scale(u[(i, j)]);
                    }
                }
            }
            out
        })
    }

    /// `W^* Psi(.) V`.
    pub fn module_map(&self) -> Result<ModuleMap> {
        ModuleMap::compress(&self.psi, &self.w, &self.v)
    }

    /// `V^* rho(.) V`.
    pub fn cp_map(&self) -> CpMap {
        compress_map(&self.rho, &self.v)
    }

    /// Largest `|Psi(e_m)^* Psi(e_l) - rho(<e_m, e_l>)|` over basis pairs.
    pub fn psi_rho_residual(&self) -> f64 {
        let n = self.shape.n;
        let imgs = self.psi.images();
        let mut worst: f64 = 0.0;
        for (m, a) in imgs.iter().enumerate() {
            for (l, b) in imgs.iter().enumerate() {
                let lhs = a.adjoint_mul(b);
                let rhs = if m / n == l / n { self.rho.unit_image(m % n, l % n) } else { CMatrix::zeros(self.k1(), self.k1()) };
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }

    pub fn residuals(&self, phi_big: &ModuleMap, phi: &CpMap) -> Result<PairResiduals> {
        Ok(PairResiduals {
            module_map: self.module_map()?.max_abs_diff(phi_big),
            cp_map: self.cp_map().choi().max_abs_diff(phi.choi()),
            rho_multiplicative: representation_residual(&self.rho),
            psi_rho_map: self.psi_rho_residual(),
            w_isometry: self.w.isometry_defect(),
            w_coisometry: self.w.coisometry_defect(),
            v_isometry: self.v.isometry_defect(),
        })
    }

    /// Columns `rho(E_ij) V` spanning `[rho(A) V H1]`.
    pub(crate) fn rho_family(&self) -> CMatrix {
        let n = self.shape.n;
        let mut cols = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                cols.push(self.rho.unit_image(i, j).matmul(&self.v));
            }
        }
        hstack_or_empty(&cols, self.k1())
    }

    /// Columns `Psi(e_m) f` for the columns `f` of `family`.
    pub(crate) fn psi_family(&self, family: &CMatrix) -> CMatrix {
        let cols: Vec<CMatrix> = self.psi.images().iter().map(|img| img.matmul(family)).collect();
        hstack_or_empty(&cols, self.k2())
    }
}

fn hstack_or_empty(cols: &[CMatrix], rows: usize) -> CMatrix {
    if cols.is_empty() {
        CMatrix::zeros(rows, 0)
    } else {
        CMatrix::hstack(cols)
    }
}

/// The pieces of a representation of the linking algebra split along
/// `pi(diag(I_p, 0))` and `pi(diag(0, I_n))`.
#[derive(Clone, Debug)]
pub struct CornerDecomposition {
    pub sigma: CpMap,
    pub rho: CpMap,
    pub psi: ModuleMap,
    pub w: CMatrix,
    pub v: CMatrix,
    /// Orthonormal bases of `K2` and `K1` inside `K`.
    pub q2: CMatrix,
    pub q1: CMatrix,
    /// Norms of the blocks of `V_raw` that must vanish.
    pub w2_norm: f64,
    pub w3_norm: f64,
}

impl CornerDecomposition {
    pub fn k1(&self) -> usize {
        self.q1.cols()
    }

    pub fn k2(&self) -> usize {
        self.q2.cols()
    }

    pub fn into_pair(self, shape: ModuleShape) -> DilationPair {
        DilationPair { shape, rho: self.rho, v: self.v, psi: self.psi, w: self.w }
    }
}

/// Split a representation `pi` of `M_{p+n}` on `K` and `V_raw : H2 ⊕ H1 -> K`.
pub fn corner_decompose(pi: &CpMap, v_raw: &CMatrix, shape: ModuleShape, d1: usize, d2: usize) -> Result<CornerDecomposition> {
    let (p, n) = (shape.p, shape.n);
    let k = pi.cod_dim();
    if pi.dom_dim() != p + n || v_raw.shape() != (k, d2 + d1) {
        return Err(Error::ShapeMismatch(format!(
            "representation of M_{} on C^{k} with V_raw {}x{}",
            pi.dom_dim(),
            v_raw.rows(),
            v_raw.cols()
        )));
    }
    let res = representation_residual(pi);
    if res > REPRESENTATION_TOL {
        return Err(Error::NotRepresentation { residual: res });
    }
    let mut p2 = CMatrix::zeros(k, k);
    for i in 0..p {
        p2 = &p2 + &pi.unit_image(i, i);
    }
    let mut p1 = CMatrix::zeros(k, k);
    for i in p..p + n {
        p1 = &p1 + &pi.unit_image(i, i);
    }
    let q2 = span_basis(&p2)?;
    let q1 = span_basis(&p1)?;
    if q2.cols() + q1.cols() != k {
        return Err(Error::ProjectionLeak { residual: (q2.cols() + q1.cols()) as f64 - k as f64 });
    }
    // off-corner blocks: pi(diag(u,0)) must not mix K2 with K1
    let mut leak: f64 = q2.adjoint_mul(&q1).max_abs();
    for i in 0..p {
        for j in 0..p {
            leak = leak.max(q1.adjoint_mul(&pi.unit_image(i, j).matmul(&q2)).max_abs());
        }
    }
    for i in p..p + n {
        for j in p..p + n {
            leak = leak.max(q2.adjoint_mul(&pi.unit_image(i, j).matmul(&q1)).max_abs());
        }
    }
    if leak > REPRESENTATION_TOL {
        return Err(Error::ProjectionLeak { residual: leak });
    }
    let sigma = CpMap::from_fn(p, q2.cols(), |u| {
        let mut big = CMatrix::zeros(p + n, p + n);
        big.set_block(0, 0, u);
        q2.adjoint_mul(&pi.apply(&big).expect("square").matmul(&q2))
    });
    let rho = CpMap::from_fn(n, q1.cols(), |a| {
        let mut big = CMatrix::zeros(p + n, p + n);
        big.set_block(p, p, a);
        q1.adjoint_mul(&pi.apply(&big).expect("square").matmul(&q1))
    });
    let psi = ModuleMap::from_fn(shape, q1.cols(), q2.cols(), |x| {
        let mut big = CMatrix::zeros(p + n, p + n);
        big.set_block(0, p, x);
        q2.adjoint_mul(&pi.apply(&big).expect("square").matmul(&q1))
    })?;
    let raw2 = v_raw.block(0, 0, k, d2);
    let raw1 = v_raw.block(0, d2, k, d1);
    Ok(CornerDecomposition {
        sigma,
        rho,
        psi,
        w: q2.adjoint_mul(&raw2),
        v: q1.adjoint_mul(&raw1),
        w2_norm: q1.adjoint_mul(&raw2).frobenius_norm(),
        w3_norm: q2.adjoint_mul(&raw1).frobenius_norm(),
        q2,
        q1,
    })
}

/// `M (M^* M)^{-1/2}`; leaves `M` alone when `M^* M` is singular.
fn normalize_isometry(m: &CMatrix) -> Result<CMatrix> {
    if m.cols() == 0 {
        return Ok(m.clone());
    }
    let g = m.adjoint_mul(m);
    let root = psd_sqrt(&g)?;
    if crate::matkernel::numerical_rank(&root, RANK_TOL) < m.cols() {
        return Ok(m.clone());
    }
    Ok(m.matmul(&pseudo_inverse(&root, LSTSQ_RCOND)))
}

/// Dilation pair from the minimal Stinespring dilation of the CP extension.
///
/// `W` is returned as an exact isometry, and `V` too when `phi` is unital; the
/// extension is only CP up to the solver tolerance, so both are renormalized
/// after the split.
pub fn dilate(phi_big: &ModuleMap, phi: &CpMap, opts: &SolverOptions) -> Result<DilationPair> {
    let cert = certify(phi_big, phi, opts)?;
    let ext = match cert.verdict {
        Verdict::NotSemiPhi => return Err(Error::NotSemiPhi { gram_min_eig: cert.gram_min_eig }),
        Verdict::Undecided => {
            let st = cert.stats.expect("undecided certificates carry solver stats");
            return Err(Error::InfeasibleWithinBudget { residual: st.min_eig, iterations: st.iterations });
        }
        Verdict::CompletelySemiPhi => cert.extension.expect("certified extension"),
    };
    dilate_block(&ext.theta, phi_big.shape(), phi_big.d1(), phi_big.d2(), phi.is_unital(1e-7))
}

/// Dilation through the closed-form extension of [`schur_extension`] instead of
/// the iterative solver.
pub fn dilate_schur(phi_big: &ModuleMap, phi: &CpMap) -> Result<DilationPair> {
    let Some(ext) = schur_extension(phi_big, phi)? else {
        let g = crate::semiphi::gram_kernel(phi_big, phi)?;
        if g.is_psd() {
            return Err(Error::IllConditioned("closed-form extension is not CP".into()));
        }
        return Err(Error::NotSemiPhi { gram_min_eig: g.min_eig });
    };
    dilate_block(&ext.theta, phi_big.shape(), phi_big.d1(), phi_big.d2(), phi.is_unital(1e-7))
}

/// Dilation pair read off a CP block map `Theta` on the linking algebra.
pub fn dilate_block(theta: &CpMap, shape: ModuleShape, d1: usize, d2: usize, unital_phi: bool) -> Result<DilationPair> {
    let st = theta.psd_part()?.stinespring_minimal()?;
    let pi = ampliation(shape.linking_dim(), st.multiplicity);
    let dec = corner_decompose(&pi, &st.v, shape, d1, d2)?;
    let tol = 1e-6 * (1.0 + st.v.frobenius_norm());
    if dec.w2_norm > tol || dec.w3_norm > tol {
        return Err(Error::ProjectionLeak { residual: dec.w2_norm.max(dec.w3_norm) });
    }
    let mut pair = dec.into_pair(shape);
    pair.w = normalize_isometry(&pair.w)?;
    if unital_phi {
        pair.v = normalize_isometry(&pair.v)?;
    }
    Ok(pair)
}

/// Cut a pair down to `K1' = [rho(A) V H1]` and `L = [Psi(E) K1']`.
pub fn minimize(pair: &DilationPair, phi_big: &ModuleMap, phi: &CpMap) -> Result<DilationPair> {
    let res = pair.residuals(phi_big, phi)?;
    if res.module_map > PAIR_TOL || res.cp_map > PAIR_TOL {
        return Err(Error::InvariantViolation(format!(
            "pair does not dilate the instance (residuals {:.3e}, {:.3e})",
            res.module_map, res.cp_map
        )));
    }
    let q1 = span_basis(&pair.rho_family())?;
    let rho = compress_map(&pair.rho, &q1);
    let v = q1.adjoint_mul(&pair.v);
    let psi1 = ModuleMap::compress(&pair.psi, &CMatrix::identity(pair.k2()), &q1)?;
    let stage1 = DilationPair { shape: pair.shape, rho, v, psi: psi1, w: pair.w.clone() };
    let ql = span_basis(&stage1.psi_family(&CMatrix::identity(stage1.k1())))?;
    let psi = ModuleMap::compress(&stage1.psi, &ql, &CMatrix::identity(stage1.k1()))?;
    let w = ql.adjoint_mul(&stage1.w);
    Ok(DilationPair { psi, w, ..stage1 })
}

/// `([rho(A) V H1] = K1, [Psi(E) K1] = K2)` by rank.
pub fn check_minimal(pair: &DilationPair) -> (bool, bool) {
    let rank = |m: &CMatrix| if m.cols() == 0 { 0 } else { crate::matkernel::numerical_rank(m, RANK_TOL) };
    let cond_i = rank(&pair.rho_family()) == pair.k1();
    let cond_ii = rank(&pair.psi_family(&CMatrix::identity(pair.k1()))) == pair.k2();
    (cond_i, cond_ii)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EquivalenceResiduals {
    pub t1_unitary: f64,
    pub t2_unitary: f64,
    /// `|T1 V - U|`.
    pub v_intertwine: f64,
    /// `|T2 W - S|`.
    pub w_intertwine: f64,
    /// `max |T2 Psi(e_m) - Gamma(e_m) T1|`.
    pub psi_intertwine: f64,
    /// `max |T1 rho(E_ij) - pi(E_ij) T1|`.
    pub rho_intertwine: f64,
    /// `max |T2 sigma(E_ij) - tau(E_ij) T2|`.
    pub sigma_intertwine: f64,
}

impl EquivalenceResiduals {
    pub fn max(&self) -> f64 {
        [
            self.t1_unitary,
            self.t2_unitary,
            self.v_intertwine,
            self.w_intertwine,
            self.psi_intertwine,
            self.rho_intertwine,
            self.sigma_intertwine,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct Equivalence {
    pub t1: CMatrix,
    pub t2: CMatrix,
    pub residuals: EquivalenceResiduals,
}

/// Unitary `T` with `T f1 = f2` column by column, after checking that the two
/// families have the same Gram matrix.
fn intertwiner(f1: &CMatrix, f2: &CMatrix, what: &str) -> Result<CMatrix> {
    if f1.rows() != f2.rows() {
        return Err(Error::NotEquivalent { gram_gap: f64::INFINITY });
    }
    let gap = f1.adjoint_mul(f1).max_abs_diff(&f2.adjoint_mul(f2));
    if gap > EQUIVALENCE_TOL {
        return Err(Error::NotEquivalent { gram_gap: gap });
    }
    if f1.rows() == 0 {
        return Ok(CMatrix::zeros(0, 0));
    }
    // T f1 = f2  <=>  f1^* T^* = f2^*
    let t = solve_lstsq(&f1.adjoint(), &f2.adjoint())?.adjoint();
    polar_unitary(&t).map_err(|e| Error::IllConditioned(format!("{what}: {e}")))
}

fn max_over(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, f64::max)
}

/// Unitaries `T1 : K1 -> L1`, `T2 : K2 -> L2` between two minimal pairs.
pub fn equivalence_unitaries(a: &DilationPair, b: &DilationPair) -> Result<Equivalence> {
    if a.shape != b.shape || a.d1() != b.d1() || a.d2() != b.d2() {
        return Err(Error::ShapeMismatch("pairs for different instance dimensions".into()));
    }
    let fa = a.rho_family();
    let fb = b.rho_family();
    let t1 = intertwiner(&fa, &fb, "T1")?;
    let t2 = intertwiner(&a.psi_family(&fa), &b.psi_family(&fb), "T2")?;
    let (p, n) = (a.shape.p, a.shape.n);
    let (sa, sb) = (a.sigma(), b.sigma());
    let residuals = EquivalenceResiduals {
        t1_unitary: unitary_defect(&t1),
        t2_unitary: unitary_defect(&t2),
        v_intertwine: t1.matmul(&a.v).max_abs_diff(&b.v),
        w_intertwine: t2.matmul(&a.w).max_abs_diff(&b.w),
        psi_intertwine: max_over(
            (0..a.shape.dim()).map(|m| t2.matmul(&a.psi.image(m)).max_abs_diff(&b.psi.image(m).matmul(&t1))),
        ),
        rho_intertwine: max_over((0..n * n).map(|k| {
            let (i, j) = (k / n, k % n);
            t1.matmul(&a.rho.unit_image(i, j)).max_abs_diff(&b.rho.unit_image(i, j).matmul(&t1))
        })),
        sigma_intertwine: max_over((0..p * p).map(|k| {
            let (i, j) = (k / p, k % p);
            t2.matmul(&sa.unit_image(i, j)).max_abs_diff(&sb.unit_image(i, j).matmul(&t2))
        })),
    };
    Ok(Equivalence { t1, t2, residuals })
}

fn unitary_defect(t: &CMatrix) -> f64 {
    t.isometry_defect().max(t.coisometry_defect())
}

/// Dimension of `{P ⊕ Q : P Psi(x) = Psi(x) Q, Q Psi(x)^* = Psi(x)^* P}`.
pub fn invariant_pair_dimension(psi: &ModuleMap) -> usize {
    crate::radon::commutant_basis(psi).len()
}

/// Whether a unital CP map is pure, via irreducibility of the minimal dilation
/// of `(phi, phi)` over `E = A`.
pub fn is_pure_ucp(phi: &CpMap, opts: &SolverOptions) -> Result<bool> {
    Ok(purity_report(phi, opts)?.commutant_dim == 1)
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub pair: DilationPair,
    pub commutant_dim: usize,
}

pub fn purity_report(phi: &CpMap, opts: &SolverOptions) -> Result<PurityReport> {
    let res = phi.unitality_residual();
    if res > 1e-9 {
        return Err(Error::NotUnital { residual: res });
    }
    let n = phi.dom_dim();
    let d = phi.cod_dim();
    let shape = ModuleShape::new(n, n)?;
    let big = ModuleMap::from_fn(shape, d, d, |x| phi.apply(x).expect("square"))?;
    let pair = minimize(&dilate(&big, phi, opts)?, &big, phi)?;
    let commutant_dim = invariant_pair_dimension(&pair.psi);
    Ok(PurityReport { pair, commutant_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Dims, InstanceKind};
    use crate::matkernel::random::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    fn scalar_id() -> (ModuleMap, CpMap) {
        let shape = ModuleShape::new(1, 1).unwrap();
        (ModuleMap::new(shape, 1, 1, CMatrix::identity(1)).unwrap(), CpMap::identity(1))
    }

    #[test]
    fn ampliation_is_representation() {
        assert!(representation_residual(&ampliation(3, 2)) < 1e-15);
        assert!(representation_residual(&CpMap::depolarizing(2)) > 0.1);
    }

    #[test]
    fn decompose_identity_representation() {
        let shape = ModuleShape::new(1, 1).unwrap();
        let dec = corner_decompose(&ampliation(2, 1), &CMatrix::identity(2), shape, 1, 1).unwrap();
        assert_eq!((dec.k2(), dec.k1()), (1, 1));
        assert!((dec.w[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((dec.psi.image(0)[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert_eq!(dec.w2_norm + dec.w3_norm, 0.0);
    }

    #[test]
    fn decompose_multiplicity_two() {
        let shape = ModuleShape::new(1, 1).unwrap();
        let v_raw = CMatrix::identity(2).kron(&CMatrix::from_real(2, 1, &[1.0, 0.0]));
        let dec = corner_decompose(&ampliation(2, 2), &v_raw, shape, 1, 1).unwrap();
        assert_eq!((dec.k2(), dec.k1()), (2, 2));
        let pair = dec.into_pair(shape);
        assert!(pair.psi_rho_residual() < 1e-14);
        assert!(pair.module_map().unwrap().matrix().max_abs_diff(&CMatrix::identity(1)) < 1e-14);
    }

    #[test]
    fn decompose_rejects_non_representation() {
        let shape = ModuleShape::new(1, 1).unwrap();
        let err = corner_decompose(&CpMap::depolarizing(2), &CMatrix::identity(2), shape, 1, 1);
        assert!(matches!(err, Err(Error::NotRepresentation { .. })));
    }

    #[test]
    fn scalar_identity_dilation() {
        let (big, phi) = scalar_id();
        let pair = minimize(&dilate(&big, &phi, &opts()).unwrap(), &big, &phi).unwrap();
        assert_eq!((pair.k1(), pair.k2()), (1, 1));
        let r = pair.residuals(&big, &phi).unwrap();
        assert!(r.module_map < 1e-7 && r.cp_map < 1e-7);
        assert_eq!(check_minimal(&pair), (true, true));
    }

    #[test]
    fn zero_map_dilation() {
        let shape = ModuleShape::new(1, 1).unwrap();
        let big = ModuleMap::zero(shape, 1, 1);
        let phi = CpMap::identity(1);
        let pair = dilate(&big, &phi, &opts()).unwrap();
        let r = pair.residuals(&big, &phi).unwrap();
        assert!(r.module_map < 1e-7 && r.cp_map < 1e-7 && r.w_isometry < 1e-8);
        let min = minimize(&pair, &big, &phi).unwrap();
        assert_eq!(check_minimal(&min), (true, true));
        let fam = min.psi_family(&CMatrix::identity(min.k1()));
        let rank = if fam.cols() == 0 { 0 } else { crate::matkernel::numerical_rank(&fam, RANK_TOL) };
        assert_eq!(min.k2(), rank);
    }

    #[test]
    fn generated_pipeline() {
        for (kind, seed) in [(InstanceKind::PhiMap, 1), (InstanceKind::Subordinate, 2)] {
            let g = generate(kind, Dims::new(2, 2, 2, 2), seed).unwrap();
            let (big, phi) = (&g.instance.phi_big, &g.instance.phi);
            let pair = dilate(big, phi, &opts()).unwrap();
            let r = pair.residuals(big, phi).unwrap();
            assert!(r.module_map <= 1e-7 && r.cp_map <= 1e-7, "{r:?}");
            assert!(r.w_isometry <= 1e-8 && r.rho_multiplicative <= 1e-9 && r.psi_rho_map <= 1e-8, "{r:?}");
            let min = minimize(&pair, big, phi).unwrap();
            assert_eq!(check_minimal(&min), (true, true));
            let rm = min.residuals(big, phi).unwrap();
            assert!(rm.module_map <= 1e-7 && rm.cp_map <= 1e-7);
            assert!(min.w.spectral_norm() <= 1.0 + 1e-9);
            let co = min.w.coisometry_defect();
            match kind {
                InstanceKind::PhiMap => assert!(co <= 1e-7, "{co}"),
                _ => assert!(co > 1e-3, "{co}"),
            }
            // idempotence
            let again = minimize(&min, big, phi).unwrap();
            assert_eq!((again.k1(), again.k2()), (min.k1(), min.k2()));
        }
    }

    #[test]
    fn padded_pair_shrinks_back() {
        let g = generate(InstanceKind::PhiMap, Dims::new(1, 2, 2, 1), 4).unwrap();
        let (big, phi) = (&g.instance.phi_big, &g.instance.phi);
        let min = minimize(&dilate(big, phi, &opts()).unwrap(), big, phi).unwrap();
        // pad with a copy of the identity model on an orthogonal summand
        let extra = ampliation(2, 1);
        let rho = CpMap::from_fn(2, min.k1() + 2, |a| min.rho.apply(a).unwrap().direct_sum(&extra.apply(a).unwrap()));
        let v = CMatrix::vstack(&[min.v.clone(), CMatrix::zeros(2, min.d1())]);
        let psi = ModuleMap::from_fn(min.shape, min.k1() + 2, min.k2() + 1, |x| min.psi.apply(x).unwrap().direct_sum(x)).unwrap();
        let w = CMatrix::vstack(&[min.w.clone(), CMatrix::zeros(1, min.d2())]);
        let padded = DilationPair { shape: min.shape, rho, v, psi, w };
        assert!(padded.residuals(big, phi).unwrap().module_map < 1e-7);
        assert!(!check_minimal(&padded).0);
        let shrunk = minimize(&padded, big, phi).unwrap();
        assert_eq!((shrunk.k1(), shrunk.k2()), (min.k1(), min.k2()));
    }

    #[test]
    fn independent_extensions_give_equivalent_minimal_pairs() {
        for (kind, seed) in [(InstanceKind::PhiMap, 3), (InstanceKind::Subordinate, 5), (InstanceKind::PhiMap, 8)] {
            let g = generate(kind, Dims::new(2, 2, 2, 3), seed).unwrap();
            let (big, phi) = (&g.instance.phi_big, &g.instance.phi);
            let a = minimize(&dilate(big, phi, &opts()).unwrap(), big, phi).unwrap();
            let b = minimize(&dilate_schur(big, phi).unwrap(), big, phi).unwrap();
            assert_eq!((a.k1(), a.k2()), (b.k1(), b.k2()));
            let eq = equivalence_unitaries(&a, &b).unwrap();
            assert!(eq.residuals.max() <= 1e-6, "{:?}", eq.residuals);
        }
    }

    #[test]
    fn equivalence_of_conjugated_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = generate(InstanceKind::Subordinate, Dims::new(2, 1, 2, 2), 3).unwrap();
        let (big, phi) = (&g.instance.phi_big, &g.instance.phi);
        let a = minimize(&dilate(big, phi, &opts()).unwrap(), big, phi).unwrap();
        let same = equivalence_unitaries(&a, &a).unwrap();
        assert!(same.t1.max_abs_diff(&CMatrix::identity(a.k1())) < 1e-9);
        assert!(same.t2.max_abs_diff(&CMatrix::identity(a.k2())) < 1e-9);
        let u1 = random_unitary(&mut rng, a.k1());
        let u2 = random_unitary(&mut rng, a.k2());
        let b = DilationPair {
            shape: a.shape,
            rho: CpMap::from_fn(a.shape.n, a.k1(), |x| u1.matmul(&a.rho.apply(x).unwrap()).matmul(&u1.adjoint())),
            v: u1.matmul(&a.v),
            psi: ModuleMap::compress(&a.psi, &u2.adjoint(), &u1.adjoint()).unwrap(),
            w: u2.matmul(&a.w),
        };
        let eq = equivalence_unitaries(&a, &b).unwrap();
        assert!(eq.residuals.max() <= 1e-7, "{:?}", eq.residuals);
    }

    #[test]
    fn mismatched_pairs_are_not_equivalent() {
        let g1 = generate(InstanceKind::PhiMap, Dims::new(1, 1, 1, 1), 0).unwrap();
        let g2 = generate(InstanceKind::Subordinate, Dims::new(1, 1, 1, 1), 0).unwrap();
        let a = minimize(&dilate(&g1.instance.phi_big, &g1.instance.phi, &opts()).unwrap(), &g1.instance.phi_big, &g1.instance.phi).unwrap();
        let b = minimize(&dilate(&g2.instance.phi_big, &g2.instance.phi, &opts()).unwrap(), &g2.instance.phi_big, &g2.instance.phi).unwrap();
        assert!(matches!(equivalence_unitaries(&a, &b), Err(Error::NotEquivalent { .. })));
    }

    #[test]
    fn purity_examples() {
        assert!(is_pure_ucp(&CpMap::identity(2), &opts()).unwrap());
        assert!(!is_pure_ucp(&CpMap::depolarizing(2), &opts()).unwrap());
        let v = CMatrix::from_real(2, 1, &[0.6, 0.8]);
        assert!(is_pure_ucp(&CpMap::compression(&v), &opts()).unwrap());
        assert!(matches!(is_pure_ucp(&CpMap::identity(2).scale(2.0), &opts()), Err(Error::NotUnital { .. })));
    }

    #[test]
    fn doubled_identity_has_four_dimensional_commutant() {
        let shape = ModuleShape::new(1, 1).unwrap();
        let id = ModuleMap::new(shape, 1, 1, CMatrix::identity(1)).unwrap();
        assert_eq!(invariant_pair_dimension(&id), 1);
        let two = ModuleMap::from_fn(shape, 2, 2, |x| x.kron(&CMatrix::identity(2))).unwrap();
        assert_eq!(invariant_pair_dimension(&two), 4);
    }
}
