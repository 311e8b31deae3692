//! Dykstra alternating projections for the corner-completion problem
//!
//!   find `C_psi` with `[[C_psi, B], [B^*, C_phi]] >= 0` and
//!   `sum_i C_psi[i, i] = T` (block partial trace over the domain),
//!
//! where the trace constraint may also be absent.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matkernel::{eig_hermitian, eig_hermitian_warm, CMatrix, Eigh};

/// Minimum Choi eigenvalue accepted as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 50_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Frobenius norm of the last iterate change.
    pub last_change: f64,
    /// Smallest eigenvalue of the returned (affine-feasible) reduced Choi matrix.
    pub min_eig: f64,
    /// Deviation of the trace constraint, zero up to rounding.
    pub trace_residual: f64,
}

impl SolveStats {
    pub fn feasible(&self) -> bool {
        self.min_eig >= -FEASIBILITY_TOL
    }
}

#[derive(Clone, Debug)]
pub(crate) struct CornerProblem {
    /// Number of diagonal blocks of `C_psi`, each `d2 x d2`.
    pub p: usize,
    pub d2: usize,
    pub b: CMatrix,
    pub c_phi: CMatrix,
    pub target: Option<CMatrix>,
}

impl CornerProblem {
    fn psi_dim(&self) -> usize {
        self.p * self.d2
    }

    fn partial_trace(&self, c_psi: &CMatrix) -> CMatrix {
        let d = self.d2;
        let mut acc = CMatrix::zeros(d, d);
        for i in 0..self.p {
            acc = &acc + &c_psi.block(i * d, i * d, d, d);
        }
        acc
    }

    fn project_psi(&self, c_psi: &CMatrix) -> CMatrix {
        let mut c = c_psi.hermitian_part();
        if let Some(t) = &self.target {
            let d = self.d2;
            let shift = (&self.partial_trace(&c) - t).scale_real(1.0 / self.p as f64);
            for i in 0..self.p {
                let blk = &c.block(i * d, i * d, d, d) - &shift;
                c.set_block(i * d, i * d, &blk);
            }
        }
        c
    }

    /// Orthogonal projection onto the affine constraint set.
    fn project_affine(&self, z: &CMatrix) -> CMatrix {
        let a = self.psi_dim();
        let c_psi = self.project_psi(&z.block(0, 0, a, a));
        super::block::reduced_choi(&c_psi, &self.b, &self.c_phi)
    }

    fn initial(&self) -> CMatrix {
        let a = self.psi_dim();
        let c_psi = match &self.target {
            Some(t) => CMatrix::identity(self.p).kron(t).scale_real(1.0 / self.p as f64),
            None => CMatrix::zeros(a, a),
        };
        super::block::reduced_choi(&c_psi, &self.b, &self.c_phi)
    }

    pub fn trace_residual(&self, c_psi: &CMatrix) -> f64 {
        match &self.target {
            Some(t) => self.partial_trace(c_psi).max_abs_diff(t),
            None => 0.0,
        }
    }

    /// Returns the final affine-feasible iterate and its statistics.
    pub fn solve(&self, opts: &SolverOptions) -> Result<(CMatrix, SolveStats)> {
        let mut x = self.initial();
        let mut corr = CMatrix::zeros(x.rows(), x.cols());
        let mut basis: Option<CMatrix> = None;
        let mut last_change = f64::INFINITY;
        let mut iterations = 0;
        while iterations < opts.max_iter {
            iterations += 1;
            let shifted = &x + &corr;
            let eig = match &basis {
                Some(q) => eig_hermitian_warm(&shifted, q)?,
                None => eig_hermitian(&shifted)?,
            };
            let y = clip(&eig);
            basis = Some(eig.vectors);
            corr = &shifted - &y;
            let next = self.project_affine(&y);
            last_change = next.distance(&x);
            x = next;
            if last_change < opts.tol {
                break;
            }
        }
        let min_eig = if x.rows() == 0 { 0.0 } else { eig_hermitian(&x)?.min() };
        let a = self.psi_dim();
        let trace_residual = self.trace_residual(&x.block(0, 0, a, a));
        Ok((x, SolveStats { iterations, last_change, min_eig, trace_residual }))
    }
}

fn clip(e: &Eigh) -> CMatrix {
    e.rebuild(|l| l.max(0.0))
}
