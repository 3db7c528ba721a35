//! File formats, image decoding, run manifests and the `ndbench` command
//! line built on `ndbench-core`.

pub mod binary;
pub mod cli;
pub mod commands;
pub mod error;
pub mod image_input;
pub mod params;
pub mod run;
pub mod tables;

pub use error::{CliError, CliResult};
pub use params::Params;
pub use run::{Run, RunManifest};
