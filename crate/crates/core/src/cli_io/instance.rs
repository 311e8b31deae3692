use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cp_maps::CpMap;
use crate::error::{Error, Result};
use crate::generate::{Generated, Instance, InstanceKind, Planted};
use crate::matkernel::CMatrix;
use crate::module_algebra::ModuleShape;
use crate::semiphi::ModuleMap;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HDims {
    pub d1: usize,
    pub d2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub kind: InstanceKind,
    pub planted: Planted,
    pub seed: u64,
}

/// On-disk instance `(phi, Phi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: String,
    pub shape: ModuleShape,
    pub h_dims: HDims,
    pub phi_choi: CMatrix,
    #[serde(rename = "Phi_mat")]
    pub phi_mat: CMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GroundTruth>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance, ground_truth: Option<GroundTruth>) -> Self {
        let shape = inst.shape();
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            shape,
            h_dims: HDims { d1: inst.phi_big.d1(), d2: inst.phi_big.d2() },
            phi_choi: inst.phi.choi().clone(),
            phi_mat: inst.phi_big.matrix().clone(),
            ground_truth,
        }
    }

    pub fn from_generated(g: &Generated) -> Self {
        let gt = GroundTruth { kind: g.planted.kind, planted: g.planted.clone(), seed: g.planted.seed };
        Self::from_instance(&g.instance, Some(gt))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported schema_version '{}' (expected '{SCHEMA_VERSION}')",
                self.schema_version
            )));
        }
        ModuleShape::new(self.shape.p, self.shape.n)?;
        let HDims { d1, d2 } = self.h_dims;
        let ModuleShape { p, n } = self.shape;
        if self.phi_choi.shape() != (n * d1, n * d1) {
            return Err(Error::Parse(format!(
                "phi_choi is {}x{}, expected {}x{}",
                self.phi_choi.rows(),
                self.phi_choi.cols(),
                n * d1,
                n * d1
            )));
        }
        if self.phi_mat.shape() != (d2 * d1, p * n) {
            return Err(Error::Parse(format!(
                "Phi_mat is {}x{}, expected {}x{}",
                self.phi_mat.rows(),
                self.phi_mat.cols(),
                d2 * d1,
                p * n
            )));
        }
        if let Some(gt) = &self.ground_truth {
            if gt.seed != gt.planted.seed || gt.kind != gt.planted.kind {
                return Err(Error::Parse("ground_truth seed/kind disagree with planted parameters".into()));
            }
        }
        Ok(())
    }

    pub fn to_instance(&self) -> Result<Instance> {
        self.validate()?;
        let HDims { d1, d2 } = self.h_dims;
        let phi = CpMap::from_choi(self.shape.n, d1, self.phi_choi.clone())?;
        let big = ModuleMap::new(self.shape, d1, d2, self.phi_mat.clone())?;
        Instance::new(phi, big)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|e| parse_error(None, &e))?;
        file.validate()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let file: Self = serde_json::from_str(&text).map_err(|e| parse_error(Some(path), &e))?;
        file.validate().map_err(|e| match e {
            Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        Ok(file)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

pub(crate) fn parse_error(path: Option<&Path>, e: &serde_json::Error) -> Error {
    let at = match path {
        Some(p) => format!("{}:", p.display()),
        None => String::new(),
    };
    Error::Parse(format!("{at}line {}, column {}: {e}", e.line(), e.column()))
}
