//! Commutants of dilated module maps, the order on CP-extendable pairs,
//! subordinate pairs and Radon-Nikodym derivatives.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cp_maps::CpMap;
use crate::dilation::{ampliation, corner_decompose, DilationPair};
use crate::error::{Error, Result};
use crate::matkernel::{
    eig_hermitian, nullspace, pseudo_inverse, psd_sqrt, singular_values, solve_lstsq, CMatrix, LSTSQ_RCOND,
};
use crate::module_algebra::ModuleShape;
use crate::semiphi::{coupling_block, expand_reduced, reduced_choi, solve_corner, ModuleMap, SolveStats, SolverOptions};

/// Commutation residual accepted for a commutant element.
pub const COMMUTANT_TOL: f64 = 1e-8;

/// Relative singular-value cutoff defining the nullspace.
const NULL_TOL: f64 = 1e-9;

/// Clamping band for derivatives: `[-DERIVATIVE_BAND, 1 + DERIVATIVE_BAND]`.
pub const DERIVATIVE_BAND: f64 = 1e-7;

/// Largest accepted condition number of the spanning-family Gram matrix.
pub const MAX_GRAM_CONDITION: f64 = 1e12;

/// `P ⊕ Q` acting on `K2 ⊕ K1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutantElement {
    pub p: CMatrix,
    pub q: CMatrix,
}

impl CommutantElement {
    pub fn identity(k2: usize, k1: usize) -> Self {
        Self { p: CMatrix::identity(k2), q: CMatrix::identity(k1) }
    }

    pub fn as_block(&self) -> CMatrix {
        self.p.direct_sum(&self.q)
    }

    pub fn adjoint(&self) -> Self {
        Self { p: self.p.adjoint(), q: self.q.adjoint() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { p: self.p.matmul(&other.p), q: self.q.matmul(&other.q) }
    }

    /// Largest violation of `P Psi(e_m) = Psi(e_m) Q` and `Q Psi(e_m)^* = Psi(e_m)^* P`.
    pub fn residual(&self, psi: &ModuleMap) -> f64 {
        let mut worst: f64 = 0.0;
        for x in psi.images() {
            worst = worst.max(self.p.matmul(&x).max_abs_diff(&x.matmul(&self.q)));
            let xs = x.adjoint();
            worst = worst.max(self.q.matmul(&xs).max_abs_diff(&xs.matmul(&self.p)));
        }
        worst
    }

    /// Smallest and largest eigenvalue of the Hermitian part of `P ⊕ Q`.
    pub fn spectrum_bounds(&self) -> Result<(f64, f64)> {
        let b = self.as_block();
        if b.rows() == 0 {
            return Ok((0.0, 0.0));
        }
        let e = eig_hermitian(&b.hermitian_part())?;
        Ok((e.min(), e.max()))
    }
}

fn vec_block(out: &mut CMatrix, row: usize, col: usize, m: &CMatrix, s: f64) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out[(row + i, col + j)] += m[(i, j)] * s;
        }
    }
}

/// Accuracy required of a matrix-unit frame.
const FRAME_TOL: f64 = 1e-8;

/// Unitary `F` (`k x m r`) with `F^* units(i, j) F = E_ij ⊗ I_r`, when the
/// `units` are the images of the matrix units under a unital
/// *-representation of `M_m` on `C^k`.
fn matrix_unit_frame(units: impl Fn(usize, usize) -> CMatrix, m: usize, k: usize) -> Option<(CMatrix, usize)> {
    if m == 0 || k == 0 {
        return None;
    }
    let e00 = units(0, 0);
    let eig = eig_hermitian(&e00.hermitian_part()).ok()?;
    let keep: Vec<usize> = (0..k).filter(|&c| eig.values[c] > 0.5).collect();
    let r = keep.len();
    if r == 0 || m * r != k {
        return None;
    }
    let u = eig.vectors.select_cols(&keep);
    let f = CMatrix::hstack(&(0..m).map(|i| units(i, 0).matmul(&u)).collect::<Vec<_>>());
    if f.isometry_defect() > FRAME_TOL {
        return None;
    }
    let ir = CMatrix::identity(r);
    for i in 0..m {
        for j in 0..m {
            let expect = CMatrix::unit(m, m, i, j).kron(&ir);
            if f.adjoint_mul(&units(i, j).matmul(&f)).max_abs_diff(&expect) > FRAME_TOL {
                return None;
            }
        }
    }
    Some((f, r))
}

/// Nullspace of the stacked relations `P X = X Q`, `Q X^* = X^* P` over the
/// images `X` of `psi`, as vectors `[vec P; vec Q]`.
fn commutant_nullspace(psi: &ModuleMap) -> CMatrix {
    let (k1, k2) = (psi.d1(), psi.d2());
    let unknowns = k2 * k2 + k1 * k1;
    if unknowns == 0 {
        return CMatrix::zeros(0, 0);
    }
    let block = k2 * k1;
    let images = psi.images();
    let mut sys = CMatrix::zeros(2 * block * images.len(), unknowns);
    let id1 = CMatrix::identity(k1);
    let id2 = CMatrix::identity(k2);
    for (m, x) in images.iter().enumerate() {
        let row = 2 * block * m;
        // P X - X Q
        vec_block(&mut sys, row, 0, &id2.kron(&x.transpose()), 1.0);
        vec_block(&mut sys, row, k2 * k2, &x.kron(&id1), -1.0);
        // Q X^* - X^* P
        vec_block(&mut sys, row + block, 0, &x.adjoint().kron(&id2), -1.0);
        vec_block(&mut sys, row + block, k2 * k2, &id1.kron(&x.conj()), 1.0);
    }
    nullspace(&sys, NULL_TOL)
}

fn unvec(v: &CMatrix, col: usize, k2: usize, k1: usize) -> CommutantElement {
    let p = CMatrix::from_fn(k2, k2, |i, j| v[(i * k2 + j, col)]);
    let q = CMatrix::from_fn(k1, k1, |i, j| v[(k2 * k2 + i * k1 + j, col)]);
    CommutantElement { p, q }
}

/// Commutant through the matrix units of `sigma` and `rho`: when
/// `Psi(x)^* Psi(y)` and `Psi(x) Psi(y)^*` generate unital representations,
/// `P = F2 (I_p ⊗ Y2) F2^*`, `Q = F1 (I_n ⊗ Y1) F1^*` and `Psi(E_ij) = F2 (E_ij ⊗ Z) F1^*`,
/// which leaves the relations `Y2 Z = Z Y1`, `Y1 Z^* = Z^* Y2`.
fn reduced_commutant(psi: &ModuleMap) -> Option<Vec<CommutantElement>> {
    let shape = psi.shape();
    let (p, n) = (shape.p, shape.n);
    let (k1, k2) = (psi.d1(), psi.d2());
    let image = |i: usize, j: usize| psi.image(i * n + j);
    let (f1, r1) = matrix_unit_frame(|j, l| image(0, j).adjoint_mul(&image(0, l)), n, k1)?;
    let (f2, r2) = matrix_unit_frame(|i, k| image(i, 0).matmul(&image(k, 0).adjoint()), p, k2)?;
    let z = f2.adjoint_mul(&image(0, 0).matmul(&f1)).block(0, 0, r2, r1);
    for i in 0..p {
        for j in 0..n {
            let expect = CMatrix::unit(p, n, i, j).kron(&z);
            if f2.adjoint_mul(&image(i, j).matmul(&f1)).max_abs_diff(&expect) > FRAME_TOL {
                return None;
            }
        }
    }
    let scalar = ModuleShape::new(1, 1).ok()?;
    let zmap = ModuleMap::from_fn(scalar, r1, r2, |x| z.scale(x[(0, 0)])).ok()?;
    let null = commutant_nullspace(&zmap);
    let (ip, inn) = (CMatrix::identity(p), CMatrix::identity(n));
    Some(
        (0..null.cols())
            .map(|c| {
                let y = unvec(&null, c, r2, r1);
                CommutantElement {
                    p: f2.matmul(&ip.kron(&y.p)).matmul(&f2.adjoint()),
                    q: f1.matmul(&inn.kron(&y.q)).matmul(&f1.adjoint()),
                }
            })
            .collect(),
    )
}

/// A basis of `Psi(E)'`. Uses the matrix-unit reduction when `Psi` is a
/// nondegenerate rho-map, the full linear system otherwise.
pub fn commutant_basis(psi: &ModuleMap) -> Vec<CommutantElement> {
    if let Some(basis) = reduced_commutant(psi) {
        return basis;
    }
    let (k1, k2) = (psi.d1(), psi.d2());
    let null = commutant_nullspace(psi);
    (0..null.cols()).map(|c| unvec(&null, c, k2, k1)).collect()
}

fn flatten_element(e: &CommutantElement) -> CMatrix {
    CMatrix::vstack(&[e.p.vectorize(), e.q.vectorize()])
}

/// Distance of `e` from the span of `basis`.
pub fn span_residual(basis: &[CommutantElement], e: &CommutantElement) -> Result<f64> {
    let target = flatten_element(e);
    if basis.is_empty() {
        return Ok(target.frobenius_norm());
    }
    let a = CMatrix::hstack(&basis.iter().map(flatten_element).collect::<Vec<_>>());
    let coef = solve_lstsq(&a, &target)?;
    Ok(a.matmul(&coef).distance(&target))
}

/// Commutant `{X : X pi(E_ij) = pi(E_ij) X}` of a representation: read off
/// its multiplicity `r` as `F (I_m ⊗ M_r) F^*`, or from the nullspace of the
/// linear system when `pi` is not a unital representation.
pub fn representation_commutant(pi: &CpMap) -> Vec<CMatrix> {
    let m = pi.dom_dim();
    let k = pi.cod_dim();
    if let Some((f, r)) = matrix_unit_frame(|i, j| pi.unit_image(i, j), m, k) {
        let im = CMatrix::identity(m);
        return (0..r * r)
            .map(|c| f.matmul(&im.kron(&CMatrix::unit(r, r, c / r, c % r))).matmul(&f.adjoint()))
            .collect();
    }
    if k == 0 {
        return Vec::new();
    }
    let id = CMatrix::identity(k);
    let mut sys = CMatrix::zeros(m * m * k * k, k * k);
    for i in 0..m {
        for j in 0..m {
            let e = pi.unit_image(i, j);
            // X E - E X
            let a = &id.kron(&e.transpose()) - &e.kron(&id);
            sys.set_block((i * m + j) * k * k, 0, &a);
        }
    }
    let null = nullspace(&sys, NULL_TOL);
    (0..null.cols()).map(|c| CMatrix::from_fn(k, k, |r, s| null[(r * k + s, c)])).collect()
}

/// `[[sigma(u), Psi(x)], [Psi(y)^*, rho(a)]]` on `K2 ⊕ K1`.
pub fn linking_representation(pair: &DilationPair) -> CpMap {
    let (p, n) = (pair.shape.p, pair.shape.n);
    let (k1, k2) = (pair.k1(), pair.k2());
    let sigma = pair.sigma();
    CpMap::from_fn(p + n, k2 + k1, |l| {
        let c = crate::module_algebra::extract_corners(pair.shape, l).expect("linking element");
        let mut out = CMatrix::zeros(k2 + k1, k2 + k1);
        out.set_block(0, 0, &sigma.apply(&c.u).expect("square"));
        out.set_block(0, k2, &pair.psi.apply(&c.x).expect("module element"));
        out.set_block(k2, 0, &pair.psi.apply(&c.y).expect("module element").adjoint());
        out.set_block(k2, k2, &pair.rho.apply(&c.a).expect("square"));
        out
    })
}

/// Random positive contraction in the span of `basis`: real coefficients in
/// `(-1, 1)`, Hermitian part, shifted by `(|B| + eps) I` and scaled to norm one.
pub fn sample_positive_contraction(
    basis: &[CommutantElement],
    rng: &mut impl Rng,
    eps: f64,
) -> Result<CommutantElement> {
    let first = basis.first().ok_or(Error::EmptyInput)?;
    let (k2, k1) = (first.p.rows(), first.q.rows());
    let mut acc = CommutantElement { p: CMatrix::zeros(k2, k2), q: CMatrix::zeros(k1, k1) };
    for b in basis {
        let c: f64 = rng.random_range(-1.0..1.0);
        acc = CommutantElement { p: &acc.p + &b.p.scale_real(c), q: &acc.q + &b.q.scale_real(c) };
    }
    let herm = CommutantElement { p: acc.p.hermitian_part(), q: acc.q.hermitian_part() };
    let norm = herm.as_block().spectral_norm();
    let shift = norm + eps;
    let shifted = CommutantElement {
        p: &herm.p + &CMatrix::identity(k2).scale_real(shift),
        q: &herm.q + &CMatrix::identity(k1).scale_real(shift),
    };
    let top = shifted.as_block().spectral_norm();
    let s = if top > 1.0 { 1.0 / top } else { 1.0 };
    Ok(CommutantElement { p: shifted.p.scale_real(s), q: shifted.q.scale_real(s) })
}

/// `(phi_S, Phi_{T ⊕ S})` with `phi_S(a) = V^* S rho(a) V` and
/// `Phi_{T ⊕ S}(x) = W^* T^{1/2} Psi(x) S^{1/2} V`.
pub fn construct_subordinate(pair: &DilationPair, d: &CommutantElement) -> Result<(CpMap, ModuleMap)> {
    if d.p.shape() != (pair.k2(), pair.k2()) || d.q.shape() != (pair.k1(), pair.k1()) {
        return Err(Error::ShapeMismatch("commutant element does not act on K2 ⊕ K1".into()));
    }
    let res = d.residual(&pair.psi);
    if res > COMMUTANT_TOL {
        return Err(Error::NotInCommutant { residual: res });
    }
    let (lo, _) = d.spectrum_bounds()?;
    let herm = d.as_block().hermiticity_residual();
    if herm > COMMUTANT_TOL {
        return Err(Error::NotPositive { min_eig: f64::NAN });
    }
    if lo < -COMMUTANT_TOL {
        return Err(Error::NotPositive { min_eig: lo });
    }
    let t_half = psd_sqrt(&d.p)?;
    let s_half = psd_sqrt(&d.q)?;
    let sv = s_half.matmul(&pair.v);
    let phi = crate::dilation::compress_map(&pair.rho, &sv);
    let big = ModuleMap::compress(&pair.psi, &t_half.matmul(&pair.w), &sv)?;
    Ok((phi, big))
}

/// `Theta(X) = (W ⊕ V)^* D^{1/2} pi(X) D^{1/2} (W ⊕ V)` for the linking
/// representation `pi` of a minimal pair.
pub fn subordinate_extension(pair: &DilationPair, d: &CommutantElement) -> Result<CpMap> {
    let pi = linking_representation(pair);
    let root = psd_sqrt(&d.as_block())?;
    let embed = root.matmul(&pair.w.direct_sum(&pair.v));
    Ok(crate::dilation::compress_map(&pi, &embed))
}

#[derive(Clone, Debug)]
pub struct OrderOutcome {
    pub leq: bool,
    pub stats: Vec<SolveStats>,
    /// Extensions `Theta1`, `Theta2` on the linking algebra with `Theta2 - Theta1` CP.
    pub witnesses: Option<(CpMap, CpMap)>,
}

fn check_pairs(phi1: &CpMap, big1: &ModuleMap, phi2: &CpMap, big2: &ModuleMap) -> Result<()> {
    crate::semiphi::check_pair(big1, phi1)?;
    crate::semiphi::check_pair(big2, phi2)?;
    if (big1.shape(), big1.d1(), big1.d2()) != (big2.shape(), big2.d1(), big2.d2()) {
        return Err(Error::ShapeMismatch("pairs of different dimensions".into()));
    }
    Ok(())
}

fn block_map(big: &ModuleMap, z: &CMatrix) -> Result<CpMap> {
    let shape = big.shape();
    CpMap::from_choi(shape.linking_dim(), big.d1() + big.d2(), expand_reduced(shape, big.d1(), big.d2(), z))
}

/// The order with both scalar corners pinned: the difference on the operator
/// system must extend to a CP map whose `(1,1)` corner kills the identity.
pub fn order_leq_literal(
    phi1: &CpMap,
    big1: &ModuleMap,
    phi2: &CpMap,
    big2: &ModuleMap,
    opts: &SolverOptions,
) -> Result<OrderOutcome> {
    check_pairs(phi1, big1, phi2, big2)?;
    let dphi = phi2.sub(phi1)?;
    let dbig = big2.sub(big1)?;
    let (_, stats) = solve_corner(&dbig, &dphi, Some(CMatrix::zeros(big1.d2(), big1.d2())), opts)?;
    Ok(OrderOutcome { leq: stats.feasible(), stats: vec![stats], witnesses: None })
}

/// Both pairs extend to CP maps `Theta1 <= Theta2` on the linking algebra with
/// free `(1,1)` corners.
pub fn order_leq_relaxed(
    phi1: &CpMap,
    big1: &ModuleMap,
    phi2: &CpMap,
    big2: &ModuleMap,
    opts: &SolverOptions,
) -> Result<OrderOutcome> {
    check_pairs(phi1, big1, phi2, big2)?;
    let (z1, s1) = solve_corner(big1, phi1, None, opts)?;
    let dbig = big2.sub(big1)?;
    let dphi = phi2.sub(phi1)?;
    let (zd, sd) = solve_corner(&dbig, &dphi, None, opts)?;
    // The minimal corner settles boundary instances where the solver stalls
    // just outside the feasibility tolerance.
    let t1 = relaxed_witness(big1, phi1, &z1, s1.feasible())?;
    let td = relaxed_witness(&dbig, &dphi, &zd, sd.feasible())?;
    let witnesses = match (t1, td) {
        (Some(t1), Some(td)) => Some((t1.clone(), t1.add(&td)?)),
        _ => None,
    };
    Ok(OrderOutcome { leq: witnesses.is_some(), stats: vec![s1, sd], witnesses })
}

/// Block map with the smallest `(1,1)` corner `B C_phi^+ B^*`, which is exactly
/// PSD once the range of `B^*` lies in that of `C_phi`. Falls back to the PSD
/// part of the solver iterate `z` when the solver converged.
fn relaxed_witness(big: &ModuleMap, phi: &CpMap, z: &CMatrix, converged: bool) -> Result<Option<CpMap>> {
    let b = coupling_block(big);
    let c_phi = phi.choi().hermitian_part();
    let c_psi = b.matmul(&pseudo_inverse(&c_phi, LSTSQ_RCOND)).matmul(&b.adjoint()).hermitian_part();
    let clean = block_map(big, &reduced_choi(&c_psi, &b, &c_phi))?;
    if clean.is_cp()?.is_cp {
        return Ok(Some(clean));
    }
    if converged {
        return Ok(Some(block_map(big, z)?.psd_part()?));
    }
    Ok(None)
}

/// Reconstruction and positivity diagnostics of a derivative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeResiduals {
    pub min_eig: f64,
    pub max_eig: f64,
    pub commutant: f64,
    pub module_map: f64,
    pub cp_map: f64,
}

#[derive(Clone, Debug)]
pub struct RadonNikodym {
    /// Dilation of the dominating pair, read off `Theta2`.
    pub pair: DilationPair,
    pub derivative: CommutantElement,
    pub residuals: DerivativeResiduals,
    /// Stinespring data of `Theta2` used by the sesquilinear system.
    pub dilation: Vec<CMatrix>,
    pub theta1: CpMap,
}

/// Solve `<pi(X) V xi, D pi(Y) V eta> = <xi, Theta1(X^* Y) eta>` for `D` over the
/// family `pi(E_ij) V M e_h`, where `M` is an optional invertible mixing of the
/// input space.
pub fn solve_derivative(pi: &CpMap, v_raw: &CMatrix, theta1: &CpMap, mixing: Option<&CMatrix>) -> Result<CMatrix> {
    let m = pi.dom_dim();
    let k = pi.cod_dim();
    let h = v_raw.cols();
    let mix = mixing.cloned().unwrap_or_else(|| CMatrix::identity(h));
    let vm = v_raw.matmul(&mix);
    let mut cols = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            cols.push(pi.unit_image(i, j).matmul(&vm));
        }
    }
    let fam = CMatrix::hstack(&cols);
    let sv = singular_values(&fam);
    if k > 0 {
        let smax = sv.first().copied().unwrap_or(0.0);
        let smin = sv.get(k - 1).copied().unwrap_or(0.0);
        if smin <= 0.0 || (smax / smin).powi(2) > MAX_GRAM_CONDITION {
            return Err(Error::IllConditioned(format!(
                "spanning family Gram condition {:.3e}",
                if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY }
            )));
        }
    }
    // G[(ij,a),(kl,b)] = delta_ik (M^* Theta1(E_jl) M)[a,b]
    let mut g = CMatrix::zeros(m * m * h, m * m * h);
    for i in 0..m {
        for j in 0..m {
            for l in 0..m {
                let blk = mix.adjoint_mul(&theta1.unit_image(j, l).matmul(&mix));
                g.set_block((i * m + j) * h, (i * m + l) * h, &blk);
            }
        }
    }
    // fam^* D fam = G  =>  D = (fam^*)^+ G fam^+
    let left = solve_lstsq(&fam.adjoint(), &g)?;
    let d = solve_lstsq(&fam.adjoint(), &left.adjoint())?.adjoint();
    Ok(d.hermitian_part())
}

/// Clamp the spectrum into `[0, 1]`, refusing values outside the band.
fn clamp_contraction(d: &CMatrix) -> Result<CMatrix> {
    if d.rows() == 0 {
        return Ok(d.clone());
    }
    let e = eig_hermitian(d)?;
    if e.min() < -DERIVATIVE_BAND || e.max() > 1.0 + DERIVATIVE_BAND {
        return Err(Error::IllConditioned(format!(
            "derivative spectrum [{:.3e}, {:.3e}] leaves [0, 1]",
            e.min(),
            e.max()
        )));
    }
    Ok(e.rebuild(|l| l.clamp(0.0, 1.0)))
}

/// Derivative of `(phi1, Phi1)` with respect to `(phi2, Phi2)` under the relaxed order.
pub fn rn_derivative(
    phi1: &CpMap,
    big1: &ModuleMap,
    phi2: &CpMap,
    big2: &ModuleMap,
    opts: &SolverOptions,
) -> Result<RadonNikodym> {
    let order = order_leq_relaxed(phi1, big1, phi2, big2, opts)?;
    let Some((theta1, theta2)) = order.witnesses else {
        return Err(Error::OrderFails("no CP extensions Theta1 <= Theta2 found within budget".into()));
    };
    rn_from_extensions(&theta1, &theta2, phi1, big1)
}

/// Derivative from explicit extensions `Theta1 <= Theta2`.
pub fn rn_from_extensions(theta1: &CpMap, theta2: &CpMap, phi1: &CpMap, big1: &ModuleMap) -> Result<RadonNikodym> {
    let shape: ModuleShape = big1.shape();
    let (d1, d2) = (big1.d1(), big1.d2());
    let st = theta2.stinespring_minimal()?;
    let pi = ampliation(shape.linking_dim(), st.multiplicity);
    let raw = solve_derivative(&pi, &st.v, theta1, None)?;
    let d = clamp_contraction(&raw)?;
    let dec = corner_decompose(&pi, &st.v, shape, d1, d2)?;
    let (q2, q1) = (dec.q2.clone(), dec.q1.clone());
    let derivative = CommutantElement { p: q2.adjoint_mul(&d.matmul(&q2)), q: q1.adjoint_mul(&d.matmul(&q1)) };
    let off_block = if q2.cols() * q1.cols() > 0 { q2.adjoint_mul(&d.matmul(&q1)).max_abs() } else { 0.0 };
    let pair = dec.into_pair(shape);
    let (lo, hi) = derivative.spectrum_bounds()?;
    let (phi_rec, big_rec) = construct_subordinate_unchecked(&pair, &derivative)?;
    let residuals = DerivativeResiduals {
        min_eig: lo,
        max_eig: hi,
        commutant: derivative.residual(&pair.psi).max(off_block),
        module_map: big_rec.max_abs_diff(big1),
        cp_map: phi_rec.choi().max_abs_diff(phi1.choi()),
    };
    Ok(RadonNikodym { pair, derivative, residuals, dilation: vec![st.v], theta1: theta1.clone() })
}

fn construct_subordinate_unchecked(pair: &DilationPair, d: &CommutantElement) -> Result<(CpMap, ModuleMap)> {
    let t_half = psd_sqrt(&d.p)?;
    let s_half = psd_sqrt(&d.q)?;
    let sv = s_half.matmul(&pair.v);
    Ok((crate::dilation::compress_map(&pair.rho, &sv), ModuleMap::compress(&pair.psi, &t_half.matmul(&pair.w), &sv)?))
}

/// Recompute the derivative of an existing result with the input space mixed
/// by `mixing`; agrees with the original when the derivative is unique.
pub fn resolve_derivative(rn: &RadonNikodym, mixing: &CMatrix) -> Result<CommutantElement> {
    let v_raw = &rn.dilation[0];
    let shape = rn.pair.shape;
    let k = v_raw.rows();
    let r = k / shape.linking_dim();
    let pi = ampliation(shape.linking_dim(), r);
    let d = clamp_contraction(&solve_derivative(&pi, v_raw, &rn.theta1, Some(mixing))?)?;
    let dec = corner_decompose(&pi, v_raw, shape, rn.pair.d1(), rn.pair.d2())?;
    Ok(CommutantElement {
        p: dec.q2.adjoint_mul(&d.matmul(&dec.q2)),
        q: dec.q1.adjoint_mul(&d.matmul(&dec.q1)),
    })
}
