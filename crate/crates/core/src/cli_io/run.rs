//! One function per command; each returns a report and leaves I/O to the caller.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::report::*;
use crate::cp_maps::CpMap;
use crate::dilation::{
    check_minimal, dilate_block, dilate_schur, equivalence_unitaries, minimize, purity_report, DilationPair,
};
use crate::error::{Error, Result};
use crate::generate::Instance;
use crate::matkernel::random::random_unitary;
use crate::module_algebra::ModuleShape;
use crate::radon::{
    commutant_basis, linking_representation, order_leq_literal, order_leq_relaxed, representation_commutant,
    rn_from_extensions, span_residual,
};
use crate::semiphi::{certify, ModuleMap, SolverOptions, FEASIBILITY_TOL};

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub solver: SolverOptions,
    pub seed: u64,
}

impl RunOptions {
    fn meta(&self) -> Meta {
        Meta { tol: self.solver.tol, max_iter: self.solver.max_iter, feasibility_tol: FEASIBILITY_TOL, seed: self.seed }
    }
}

pub fn check(inst: &Instance, opts: &RunOptions) -> Result<CheckReport> {
    let cert = certify(&inst.phi_big, &inst.phi, &opts.solver)?;
    let witness_defect = match &cert.witness {
        Some(w) => Some(w.defect_value(&inst.phi_big, &inst.phi)?),
        None => None,
    };
    Ok(CheckReport {
        verdict: cert.verdict,
        gram_min_eig: cert.gram_min_eig,
        dims: inst.dims(),
        iterations: cert.stats.as_ref().map(|s| s.iterations),
        solver: cert.stats,
        witness: cert.witness,
        witness_defect,
        meta: opts.meta(),
    })
}

/// Dilation pair of a certified instance, minimized on request. Uncertified
/// instances are reported with their verdict and no pair.
pub fn dilate(inst: &Instance, opts: &RunOptions, minimized: bool) -> Result<DilationReport> {
    let (big, phi) = (&inst.phi_big, &inst.phi);
    let cert = certify(big, phi, &opts.solver)?;
    let mut report = DilationReport {
        verdict: cert.verdict,
        minimized,
        gram_min_eig: cert.gram_min_eig,
        dims: inst.dims(),
        iterations: cert.stats.as_ref().map(|s| s.iterations),
        raw_dims: None,
        minimal: None,
        residuals: None,
        pair: None,
        meta: opts.meta(),
    };
    let Some(ext) = cert.extension else {
        return Ok(report);
    };
    let raw = dilate_block(&ext.theta, big.shape(), big.d1(), big.d2(), phi.is_unital(1e-7))?;
    report.raw_dims = Some((raw.k1(), raw.k2()));
    let pair = if minimized { minimize(&raw, big, phi)? } else { raw };
    report.minimal = Some(check_minimal(&pair));
    report.residuals = Some(pair.residuals(big, phi)?);
    report.pair = Some(PairMatrices::from(&pair));
    Ok(report)
}

fn conjugate(pair: &DilationPair, rng: &mut ChaCha8Rng) -> Result<DilationPair> {
    let u1 = random_unitary(rng, pair.k1());
    let u2 = random_unitary(rng, pair.k2());
    pair.conjugated(&u1, &u2)
}

fn minimal_pair(inst: &Instance, opts: &RunOptions) -> Result<DilationPair> {
    let pair = crate::dilation::dilate(&inst.phi_big, &inst.phi, &opts.solver)?;
    minimize(&pair, &inst.phi_big, &inst.phi)
}

/// Unitary equivalence of two minimal pairs: one from the iterative
/// extension, one from the closed-form extension in a seeded random basis.
pub fn equiv(inst: &Instance, opts: &RunOptions) -> Result<EquivReport> {
    let (big, phi) = (&inst.phi_big, &inst.phi);
    let a = minimal_pair(inst, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (second_pair, b) = match dilate_schur(big, phi) {
        Ok(raw) => (SecondPair::ClosedForm, conjugate(&minimize(&raw, big, phi)?, &mut rng)?),
        Err(Error::IllConditioned(_)) => (SecondPair::Conjugate, conjugate(&a, &mut rng)?),
        Err(e) => return Err(e),
    };
    let mut report = EquivReport {
        equivalent: false,
        dims: inst.dims(),
        second_pair,
        pair_dims: [(a.k1(), a.k2()), (b.k1(), b.k2())],
        residuals: None,
        gram_gap: None,
        t1: None,
        t2: None,
        meta: opts.meta(),
    };
    match equivalence_unitaries(&a, &b) {
        Ok(eq) => {
            report.equivalent = eq.residuals.max() <= crate::dilation::EQUIVALENCE_TOL;
            report.residuals = Some(eq.residuals);
            report.t1 = Some(eq.t1);
            report.t2 = Some(eq.t2);
        }
        Err(Error::NotEquivalent { gram_gap }) => {
            report.gram_gap = gram_gap.is_finite().then_some(gram_gap);
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

pub fn commutant(inst: &Instance, opts: &RunOptions) -> Result<CommutantReport> {
    let pair = minimal_pair(inst, opts)?;
    let basis = commutant_basis(&pair.psi);
    let linking = representation_commutant(&linking_representation(&pair));
    let element_residual = basis.iter().map(|e| e.residual(&pair.psi)).fold(0.0, f64::max);
    let mut closure_residual: f64 = 0.0;
    for a in &basis {
        closure_residual = closure_residual.max(span_residual(&basis, &a.adjoint())?);
        for b in &basis {
            closure_residual = closure_residual.max(span_residual(&basis, &a.mul(b))?);
        }
    }
    Ok(CommutantReport {
        irreducible: basis.len() == 1,
        dims: inst.dims(),
        k1: pair.k1(),
        k2: pair.k2(),
        commutant_dim: basis.len(),
        linking_commutant_dim: linking.len(),
        element_residual,
        closure_residual,
        basis,
        meta: opts.meta(),
    })
}

/// `sub << dom` in the literal or the relaxed order.
pub fn order(sub: &Instance, dom: &Instance, opts: &RunOptions, relaxed: bool) -> Result<OrderReport> {
    let outcome = if relaxed {
        order_leq_relaxed(&sub.phi, &sub.phi_big, &dom.phi, &dom.phi_big, &opts.solver)?
    } else {
        order_leq_literal(&sub.phi, &sub.phi_big, &dom.phi, &dom.phi_big, &opts.solver)?
    };
    Ok(OrderReport {
        leq: outcome.leq,
        relaxed,
        dims: sub.dims(),
        iterations: outcome.stats.iter().map(|s| s.iterations).collect(),
        solver: outcome.stats,
        meta: opts.meta(),
    })
}

/// Derivative of `sub` with respect to `dom`. The extensions always come from
/// the relaxed order; without `relaxed` the literal order must hold as well.
pub fn rn(sub: &Instance, dom: &Instance, opts: &RunOptions, relaxed: bool) -> Result<RnReport> {
    let mut iterations = Vec::new();
    let mut report = RnReport {
        leq: false,
        relaxed,
        dims: sub.dims(),
        iterations: Vec::new(),
        k1: None,
        k2: None,
        derivative: None,
        residuals: None,
        meta: opts.meta(),
    };
    if !relaxed {
        let lit = order_leq_literal(&sub.phi, &sub.phi_big, &dom.phi, &dom.phi_big, &opts.solver)?;
        iterations.extend(lit.stats.iter().map(|s| s.iterations));
        if !lit.leq {
            report.iterations = iterations;
            return Ok(report);
        }
    }
    let order = order_leq_relaxed(&sub.phi, &sub.phi_big, &dom.phi, &dom.phi_big, &opts.solver)?;
    iterations.extend(order.stats.iter().map(|s| s.iterations));
    report.iterations = iterations;
    let Some((theta1, theta2)) = order.witnesses else {
        return Ok(report);
    };
    let rn = rn_from_extensions(&theta1, &theta2, &sub.phi, &sub.phi_big)?;
    report.leq = true;
    report.k1 = Some(rn.pair.k1());
    report.k2 = Some(rn.pair.k2());
    report.derivative = Some(rn.derivative);
    report.residuals = Some(rn.residuals);
    Ok(report)
}

/// Purity of the unital CP map `phi` of an instance.
pub fn purity(phi: &CpMap, opts: &RunOptions) -> Result<PurityReport> {
    let rep = purity_report(phi, &opts.solver)?;
    let n = phi.dom_dim();
    let d = phi.cod_dim();
    let big = ModuleMap::from_fn(ModuleShape::new(n, n)?, d, d, |x| phi.apply(x).expect("square"))?;
    Ok(PurityReport {
        pure: rep.commutant_dim == 1,
        dom: n,
        cod: d,
        k1: rep.pair.k1(),
        k2: rep.pair.k2(),
        commutant_dim: rep.commutant_dim,
        residuals: rep.pair.residuals(&big, phi)?,
        meta: opts.meta(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate, Dims, InstanceKind};
    use crate::radon::CommutantElement;
    use crate::semiphi::Verdict;

    fn opts() -> RunOptions {
        RunOptions::default()
    }

    #[test]
    fn check_phi_map_and_adversarial() {
        let g = generate(InstanceKind::PhiMap, Dims::new(1, 2, 2, 1), 0).unwrap();
        let r = check(&g.instance, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::CompletelySemiPhi);
        assert!(r.iterations.is_some() && r.witness.is_none());
        let a = generate(InstanceKind::Adversarial, Dims::new(1, 1, 1, 1), 0).unwrap();
        let r = check(&a.instance, &opts()).unwrap();
        assert_eq!(r.verdict, Verdict::NotSemiPhi);
        assert!((r.gram_min_eig + 3.0).abs() < 1e-12);
        assert!((r.witness_defect.unwrap() - r.gram_min_eig).abs() < 1e-12);
    }

    #[test]
    fn dilate_reports_in_band() {
        let a = generate(InstanceKind::Adversarial, Dims::new(1, 1, 1, 1), 0).unwrap();
        let r = dilate(&a.instance, &opts(), true).unwrap();
        assert_eq!(r.verdict, Verdict::NotSemiPhi);
        assert!(r.pair.is_none());
        let g = generate(InstanceKind::Subordinate, Dims::new(2, 2, 2, 2), 7).unwrap();
        let r = dilate(&g.instance, &opts(), true).unwrap();
        assert_eq!(r.minimal, Some((true, true)));
        let res = r.residuals.unwrap();
        assert!(res.module_map <= 1e-7 && res.cp_map <= 1e-7);
        assert!(res.w_coisometry > 1e-3);
    }

    #[test]
    fn order_and_rn_on_subordinate() {
        let g = generate(InstanceKind::Subordinate, Dims::new(2, 2, 2, 2), 7).unwrap();
        let parent = g.parent.unwrap();
        let r = order(&g.instance, &parent, &opts(), true).unwrap();
        assert!(r.leq);
        assert!(!order(&g.instance, &parent, &opts(), false).unwrap().leq);
        let d = rn(&g.instance, &parent, &opts(), true).unwrap();
        let res = d.residuals.unwrap();
        assert!(res.min_eig >= -1e-7 && res.max_eig <= 1.0 + 1e-7 && res.module_map <= 1e-6);
        let lit = rn(&g.instance, &parent, &opts(), false).unwrap();
        assert!(!lit.leq && lit.derivative.is_none());
    }

    #[test]
    fn equiv_and_commutant() {
        let g = generate(InstanceKind::PhiMap, Dims::new(2, 2, 2, 2), 3).unwrap();
        let r = equiv(&g.instance, &RunOptions { seed: 11, ..opts() }).unwrap();
        assert!(r.equivalent, "{r:?}");
        assert_eq!(r.second_pair, SecondPair::ClosedForm);
        assert_eq!(r.pair_dims[0], r.pair_dims[1]);
        let c = commutant(&g.instance, &opts()).unwrap();
        assert_eq!(c.commutant_dim, c.linking_commutant_dim);
        assert!(c.closure_residual <= 1e-8 && c.element_residual <= 1e-8);
    }

    #[test]
    fn purity_of_standard_maps() {
        assert!(purity(&CpMap::identity(2), &opts()).unwrap().pure);
        assert!(!purity(&CpMap::depolarizing(2), &opts()).unwrap().pure);
        assert!(matches!(purity(&CpMap::trace_map(2).scale(2.0), &opts()), Err(Error::NotUnital { .. })));
    }

    #[test]
    fn reports_round_trip() {
        let g = generate(InstanceKind::Subordinate, Dims::new(2, 1, 2, 2), 4).unwrap();
        let parent = g.parent.clone().unwrap();
        let c = check(&g.instance, &opts()).unwrap();
        assert_eq!(serde_json::from_str::<CheckReport>(&serde_json::to_string(&c).unwrap()).unwrap(), c);
        let d = dilate(&g.instance, &opts(), false).unwrap();
        assert_eq!(serde_json::from_str::<DilationReport>(&serde_json::to_string(&d).unwrap()).unwrap(), d);
        let r = rn(&g.instance, &parent, &opts(), true).unwrap();
        assert_eq!(serde_json::from_str::<RnReport>(&serde_json::to_string(&r).unwrap()).unwrap(), r);
        let e = equiv(&g.instance, &opts()).unwrap();
        assert_eq!(serde_json::from_str::<EquivReport>(&serde_json::to_string(&e).unwrap()).unwrap(), e);
        let m = commutant(&g.instance, &opts()).unwrap();
        assert_eq!(serde_json::from_str::<CommutantReport>(&serde_json::to_string(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn commutant_elements_are_identity_for_irreducible() {
        let g = generate(InstanceKind::PhiMap, Dims::new(1, 1, 1, 1), 0).unwrap();
        let c = commutant(&g.instance, &opts()).unwrap();
        assert!(c.irreducible);
        let id = CommutantElement::identity(c.k2, c.k1);
        let e = &c.basis[0];
        let scale = e.p[(0, 0)];
        assert!(e.p.max_abs_diff(&id.p.scale(scale)) < 1e-9 && e.q.max_abs_diff(&id.q.scale(scale)) < 1e-9);
    }
}
