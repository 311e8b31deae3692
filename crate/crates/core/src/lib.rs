pub mod cli_io;
pub mod cp_maps;
pub mod dilation;
pub mod error;
pub mod generate;
pub mod matkernel;
pub mod module_algebra;
pub mod radon;
pub mod semiphi;

pub use error::{Error, Result};
