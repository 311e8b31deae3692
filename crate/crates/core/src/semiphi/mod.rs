//! Completely semi-φ certification and the unital CP extension on the linking algebra.

mod block;
mod gram;
mod module_map;
mod solver;

pub use block::{assemble_block, split_block};
pub use gram::{defect_level, fold_witness, gram_kernel, GramKernel, Witness};
pub use module_map::ModuleMap;
pub use solver::{SolveStats, SolverOptions, FEASIBILITY_TOL};

pub(crate) use block::{coupling_block, expand_reduced, reduced_choi};
pub(crate) use gram::check_pair;
pub(crate) use solver::CornerProblem;

use serde::{Deserialize, Serialize};

use crate::cp_maps::CpMap;
use crate::error::{Error, Result};
use crate::matkernel::{min_eigenvalue, pseudo_inverse, CMatrix, LSTSQ_RCOND};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    CompletelySemiPhi,
    NotSemiPhi,
    Undecided,
}

/// A unital `psi` making `[[psi, Phi], [Phi^*, phi]]` completely positive.
#[derive(Clone, Debug)]
pub struct Extension {
    pub psi: CpMap,
    pub theta: CpMap,
    pub stats: SolveStats,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub verdict: Verdict,
    pub gram_min_eig: f64,
    pub witness: Option<Witness>,
    pub extension: Option<Extension>,
    /// Solver statistics, also when the solve failed.
    pub stats: Option<SolveStats>,
}

impl Certificate {
    pub fn psi(&self) -> Option<&CpMap> {
        self.extension.as_ref().map(|e| &e.psi)
    }
}

/// Solve for the block map's `C_psi` with `C_psi` partial trace pinned to
/// `target` (or free), returning the completed reduced Choi matrix.
pub(crate) fn solve_corner(
    phi_big: &ModuleMap,
    phi: &CpMap,
    target: Option<CMatrix>,
    opts: &SolverOptions,
) -> Result<(CMatrix, SolveStats)> {
    check_pair(phi_big, phi)?;
    let prob = CornerProblem {
        p: phi_big.shape().p,
        d2: phi_big.d2(),
        b: coupling_block(phi_big),
        c_phi: phi.choi().hermitian_part(),
        target,
    };
    prob.solve(opts)
}

/// Find a unital CP `psi` on `M_p` such that the block map is CP.
pub fn cp_extension_solve(phi_big: &ModuleMap, phi: &CpMap, opts: &SolverOptions) -> Result<Extension> {
    let d2 = phi_big.d2();
    let (z, stats) = solve_corner(phi_big, phi, Some(CMatrix::identity(d2)), opts)?;
    if !stats.feasible() {
        return Err(Error::InfeasibleWithinBudget { residual: stats.min_eig, iterations: stats.iterations });
    }
    let shape = phi_big.shape();
    let a = shape.p * d2;
    let psi = CpMap::from_choi(shape.p, d2, z.block(0, 0, a, a))?;
    let theta = CpMap::from_choi(shape.linking_dim(), phi_big.d1() + d2, expand_reduced(shape, phi_big.d1(), d2, &z))?;
    Ok(Extension { psi, theta, stats })
}

/// Extension built from the smallest `(1,1)` corner `B C_phi^+ B^*`, topped up
/// by `u -> tr(u)/p (I - psi_min(I))` to make `psi` unital. Independent of the
/// iterative solver; `None` when the result is not CP within tolerance.
pub fn schur_extension(phi_big: &ModuleMap, phi: &CpMap) -> Result<Option<Extension>> {
    check_pair(phi_big, phi)?;
    let shape = phi_big.shape();
    let (d1, d2) = (phi_big.d1(), phi_big.d2());
    let b = coupling_block(phi_big);
    let c_phi = phi.choi().hermitian_part();
    let c_min = b.matmul(&pseudo_inverse(&c_phi, LSTSQ_RCOND)).matmul(&b.adjoint()).hermitian_part();
    let psi_min = CpMap::from_choi(shape.p, d2, c_min.clone())?;
    let rest = &CMatrix::identity(d2) - &psi_min.apply(&CMatrix::identity(shape.p))?;
    if d2 > 0 && min_eigenvalue(&rest.hermitian_part())? < -FEASIBILITY_TOL {
        return Ok(None);
    }
    let c_psi = &c_min + &CMatrix::identity(shape.p).kron(&rest).scale_real(1.0 / shape.p as f64);
    let z = reduced_choi(&c_psi, &b, &c_phi);
    let theta = CpMap::from_choi(shape.linking_dim(), d1 + d2, expand_reduced(shape, d1, d2, &z))?;
    let test = theta.is_cp()?;
    if test.min_eig < -FEASIBILITY_TOL {
        return Ok(None);
    }
    let stats = SolveStats { iterations: 0, last_change: 0.0, min_eig: test.min_eig, trace_residual: 0.0 };
    Ok(Some(Extension { psi: CpMap::from_choi(shape.p, d2, c_psi)?, theta, stats }))
}

/// Gram test first; on a PSD kernel, synthesize the extension.
pub fn certify(phi_big: &ModuleMap, phi: &CpMap, opts: &SolverOptions) -> Result<Certificate> {
    let g = gram_kernel(phi_big, phi)?;
    if !g.is_psd() {
        let witness = fold_witness(phi_big.shape(), phi_big.d1(), &g.min_vector);
        return Ok(Certificate {
            verdict: Verdict::NotSemiPhi,
            gram_min_eig: g.min_eig,
            witness: Some(witness),
            extension: None,
            stats: None,
        });
    }
    match cp_extension_solve(phi_big, phi, opts) {
        Ok(ext) => Ok(Certificate {
            verdict: Verdict::CompletelySemiPhi,
            gram_min_eig: g.min_eig,
            witness: None,
            stats: Some(ext.stats.clone()),
            extension: Some(ext),
        }),
        Err(Error::InfeasibleWithinBudget { .. }) => {
            let (_, stats) = solve_corner(phi_big, phi, Some(CMatrix::identity(phi_big.d2())), opts)?;
            Ok(Certificate {
                verdict: Verdict::Undecided,
                gram_min_eig: g.min_eig,
                witness: None,
                extension: None,
                stats: Some(stats),
            })
        }
        Err(e) => Err(e),
    }
}
