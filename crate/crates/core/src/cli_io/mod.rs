//! Instance files, reports and the command implementations behind the CLI.

mod instance;
mod report;
mod run;

pub use instance::{GroundTruth, HDims, InstanceFile, SCHEMA_VERSION};
pub use report::{
    CheckReport, CommutantReport, DilationReport, EquivReport, Meta, OrderReport, PairMatrices, PurityReport,
    RnReport, SecondPair,
};
pub use run::{check, commutant, dilate, equiv, order, purity, rn, RunOptions};

/// Environment variable overriding the default solver tolerance.
pub const TOL_ENV: &str = "SEMIPHI_TOL";

/// Serialize a report as pretty JSON.
pub fn to_json<T: serde::Serialize>(report: &T) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}
