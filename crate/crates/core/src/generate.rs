//! Seeded random instances with known ground truth.
//!
//! Every generator starts from a representation model `x -> x ⊗ I_r` of the
//! linking algebra and compresses it:
//!
//! * `PhiMap`: `Phi(x) = W^* (x ⊗ I_r) V`, `phi(a) = V^* (a ⊗ I_r) V` with `W`
//!   a coisometry, so `Phi` is a genuine phi-map.
//! * `Subordinate`: the same model cut down by `T ⊕ S = (I_p ⊗ B) ⊕ (I_n ⊗ B)`
//!   for a positive contraction `B` with `|B| = 0.9`.
//! * `Adversarial`: a phi-map with `Phi` scaled by `scale > 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cp_maps::CpMap;
use crate::error::{Error, Result};
use crate::matkernel::random::{random_isometry, random_matrix, random_psd};
use crate::matkernel::CMatrix;
use crate::module_algebra::ModuleShape;
use crate::semiphi::ModuleMap;

/// Largest accepted value of any of `p, n, d1, d2`.
pub const MAX_GEN_DIM: usize = 4;

/// Norm of the planted contraction in subordinate instances.
pub const SUBORDINATE_NORM: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    PhiMap,
    Subordinate,
    Adversarial,
}

impl std::str::FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phi_map" => Ok(Self::PhiMap),
            "subordinate" => Ok(Self::Subordinate),
            "adversarial" => Ok(Self::Adversarial),
            other => Err(Error::Parse(format!("unknown instance kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PhiMap => "phi_map",
            Self::Subordinate => "subordinate",
            Self::Adversarial => "adversarial",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub p: usize,
    pub n: usize,
    pub d1: usize,
    pub d2: usize,
}

impl Dims {
    pub fn new(p: usize, n: usize, d1: usize, d2: usize) -> Self {
        Self { p, n, d1, d2 }
    }
}

/// A pair `(phi, Phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub phi: CpMap,
    pub phi_big: ModuleMap,
}

impl Instance {
    pub fn new(phi: CpMap, phi_big: ModuleMap) -> Result<Self> {
        crate::semiphi::check_pair(&phi_big, &phi)?;
        Ok(Self { phi, phi_big })
    }

    pub fn shape(&self) -> ModuleShape {
        self.phi_big.shape()
    }

    pub fn dims(&self) -> Dims {
        let s = self.shape();
        Dims::new(s.p, s.n, self.phi_big.d1(), self.phi_big.d2())
    }
}

/// Generator parameters; `seed`, `kind`, `dims` and `scale` regenerate the
/// instance exactly, the matrices are recorded for inspection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Planted {
    pub kind: InstanceKind,
    pub dims: Dims,
    pub seed: u64,
    pub multiplicity: usize,
    /// `K2 x d2`.
    pub w: CMatrix,
    /// `K1 x d1`.
    pub v: CMatrix,
    /// `r x r` positive contraction (subordinate only).
    pub contraction: Option<CMatrix>,
    pub scale: f64,
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub instance: Instance,
    pub planted: Planted,
    /// The uncut phi-map a subordinate instance sits under.
    pub parent: Option<Instance>,
}

fn model_instance(shape: ModuleShape, d1: usize, d2: usize, w: &CMatrix, v: &CMatrix, b: &CMatrix) -> Result<Instance> {
    let phi = CpMap::from_fn(shape.n, d1, |a| v.adjoint_mul(&a.kron(b).matmul(v)));
    let big = ModuleMap::from_fn(shape, d1, d2, |x| w.adjoint_mul(&x.kron(b).matmul(v)))?;
    Instance::new(phi, big)
}

/// A random `rows x cols` matrix with spectral norm one.
fn unit_contraction(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    let g = random_matrix(rng, rows, cols);
    let s = g.spectral_norm();
    g.scale_real(1.0 / s)
}

/// Generate with the default adversarial scale 2.
pub fn generate(kind: InstanceKind, dims: Dims, seed: u64) -> Result<Generated> {
    generate_scaled(kind, dims, seed, 2.0)
}

pub fn generate_scaled(kind: InstanceKind, dims: Dims, seed: u64, scale: f64) -> Result<Generated> {
    let Dims { p, n, d1, d2 } = dims;
    if [p, n, d1, d2].iter().any(|&d| d == 0 || d > MAX_GEN_DIM) {
        return Err(Error::UnsupportedDims(format!("dims {p},{n},{d1},{d2} must lie in 1..={MAX_GEN_DIM}")));
    }
    if d2 < p {
        return Err(Error::UnsupportedDims(format!("need d2 >= p for a coisometric W (d2 = {d2}, p = {p})")));
    }
    let shape = ModuleShape::new(p, n)?;
    let r = d2 / p;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // W^* is an isometry C^(p r) -> C^d2
    let w = random_isometry(&mut rng, d2, p * r).adjoint();
    let v = if n * r >= d1 { random_isometry(&mut rng, n * r, d1) } else { unit_contraction(&mut rng, n * r, d1) };
    let ir = CMatrix::identity(r);
    let parent = model_instance(shape, d1, d2, &w, &v, &ir)?;
    let mut planted = Planted {
        kind,
        dims,
        seed,
        multiplicity: r,
        w: w.clone(),
        v: v.clone(),
        contraction: None,
        scale: 1.0,
    };
    match kind {
        InstanceKind::PhiMap => Ok(Generated { instance: parent, planted, parent: None }),
        InstanceKind::Adversarial => {
            planted.scale = scale;
            let inst = Instance::new(parent.phi.clone(), parent.phi_big.scale(scale))?;
            Ok(Generated { instance: inst, planted, parent: None })
        }
        InstanceKind::Subordinate => {
            let g = random_psd(&mut rng, r, r);
            let b = g.scale_real(SUBORDINATE_NORM / g.spectral_norm());
            let inst = model_instance(shape, d1, d2, &w, &v, &b)?;
            planted.contraction = Some(b);
            Ok(Generated { instance: inst, planted, parent: Some(parent) })
        }
    }
}

/// `T ⊕ S` for a planted subordinate instance, on `C^(p r) ⊕ C^(n r)`.
pub fn planted_commutant(planted: &Planted) -> Option<(CMatrix, CMatrix)> {
    let b = planted.contraction.as_ref()?;
    let Dims { p, n, .. } = planted.dims;
    Some((CMatrix::identity(p).kron(b), CMatrix::identity(n).kron(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiphi::gram_kernel;

    #[test]
    fn deterministic() {
        let dims = Dims::new(2, 2, 2, 2);
        for kind in [InstanceKind::PhiMap, InstanceKind::Subordinate, InstanceKind::Adversarial] {
            let a = generate(kind, dims, 7).unwrap();
            let b = generate(kind, dims, 7).unwrap();
            assert_eq!(a.instance, b.instance);
            assert_eq!(a.planted, b.planted);
        }
    }

    #[test]
    fn phi_maps_have_zero_gram_and_adversarial_are_negative() {
        for seed in 0..20 {
            let dims = Dims::new(1 + seed as usize % 2, 1 + seed as usize % 3, 1 + seed as usize % 3, 2);
            let g = generate(InstanceKind::PhiMap, dims, seed).unwrap();
            let k = gram_kernel(&g.instance.phi_big, &g.instance.phi).unwrap();
            assert!(k.matrix.max_abs() < 1e-12);
            let a = generate(InstanceKind::Adversarial, dims, seed).unwrap();
            assert!(gram_kernel(&a.instance.phi_big, &a.instance.phi).unwrap().min_eig < -1e-6);
        }
    }

    #[test]
    fn scalar_adversarial_gram_is_minus_three() {
        let a = generate(InstanceKind::Adversarial, Dims::new(1, 1, 1, 1), 0).unwrap();
        assert!(a.instance.phi.choi().max_abs_diff(&CMatrix::identity(1)) < 1e-15);
        let k = gram_kernel(&a.instance.phi_big, &a.instance.phi).unwrap();
        assert!((k.min_eig + 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_unsupported_dims() {
        assert!(matches!(generate(InstanceKind::PhiMap, Dims::new(3, 1, 1, 2), 0), Err(Error::UnsupportedDims(_))));
        assert!(generate(InstanceKind::PhiMap, Dims::new(0, 1, 1, 1), 0).is_err());
        assert!(generate(InstanceKind::PhiMap, Dims::new(1, 5, 1, 1), 0).is_err());
    }
}
