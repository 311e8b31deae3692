//! JSON reports emitted by the command-line tool. Field order is the
//! serialization order.

use serde::{Deserialize, Serialize};

use crate::dilation::{DilationPair, EquivalenceResiduals, PairResiduals};
use crate::generate::Dims;
use crate::matkernel::CMatrix;
use crate::radon::{CommutantElement, DerivativeResiduals};
use crate::semiphi::{SolveStats, Verdict, Witness};

/// Tolerance and budget metadata carried by every report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tol: f64,
    pub max_iter: usize,
    pub feasibility_tol: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub gram_min_eig: f64,
    pub dims: Dims,
    pub iterations: Option<usize>,
    pub solver: Option<SolveStats>,
    pub witness: Option<Witness>,
    /// `<probe, defect * probe>` recomputed from the witness.
    pub witness_defect: Option<f64>,
    pub meta: Meta,
}

/// Matrices of a dilation pair: `rho` by its Choi matrix, `Psi` by its images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMatrices {
    pub k1: usize,
    pub k2: usize,
    pub rho_choi: CMatrix,
    pub v: CMatrix,
    pub psi_mat: CMatrix,
    pub w: CMatrix,
}

impl From<&DilationPair> for PairMatrices {
    fn from(pair: &DilationPair) -> Self {
        Self {
            k1: pair.k1(),
            k2: pair.k2(),
            rho_choi: pair.rho.choi().clone(),
            v: pair.v.clone(),
            psi_mat: pair.psi.matrix().clone(),
            w: pair.w.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilationReport {
    pub verdict: Verdict,
    pub minimized: bool,
    pub gram_min_eig: f64,
    pub dims: Dims,
    pub iterations: Option<usize>,
    /// `(dim K1, dim K2)` before minimization.
    pub raw_dims: Option<(usize, usize)>,
    /// Rank conditions `[rho(A) V H1] = K1` and `[Psi(E) K1] = K2`.
    pub minimal: Option<(bool, bool)>,
    pub residuals: Option<PairResiduals>,
    pub pair: Option<PairMatrices>,
    pub meta: Meta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondPair {
    /// Built from the closed-form extension, then conjugated by seeded unitaries.
    ClosedForm,
    /// Only a seeded unitary conjugate of the first pair.
    Conjugate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivReport {
    pub equivalent: bool,
    pub dims: Dims,
    pub second_pair: SecondPair,
    /// `(dim K1, dim K2)` of both minimal pairs.
    pub pair_dims: [(usize, usize); 2],
    pub residuals: Option<EquivalenceResiduals>,
    pub gram_gap: Option<f64>,
    pub t1: Option<CMatrix>,
    pub t2: Option<CMatrix>,
    pub meta: Meta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutantReport {
    pub irreducible: bool,
    pub dims: Dims,
    pub k1: usize,
    pub k2: usize,
    pub commutant_dim: usize,
    /// Dimension of the commutant of the full linking representation.
    pub linking_commutant_dim: usize,
    pub element_residual: f64,
    /// Distance of adjoints and pairwise products from the span.
    pub closure_residual: f64,
    pub basis: Vec<CommutantElement>,
    pub meta: Meta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderReport {
    pub leq: bool,
    pub relaxed: bool,
    pub dims: Dims,
    pub iterations: Vec<usize>,
    pub solver: Vec<SolveStats>,
    pub meta: Meta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RnReport {
    pub leq: bool,
    pub relaxed: bool,
    pub dims: Dims,
    pub iterations: Vec<usize>,
    pub k1: Option<usize>,
    pub k2: Option<usize>,
    pub derivative: Option<CommutantElement>,
    pub residuals: Option<DerivativeResiduals>,
    pub meta: Meta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub pure: bool,
    pub dom: usize,
    pub cod: usize,
    pub k1: usize,
    pub k2: usize,
    pub commutant_dim: usize,
    pub residuals: PairResiduals,
    pub meta: Meta,
}
