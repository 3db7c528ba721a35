use ndbench_core::descriptors::{pca_train, Descriptor, DEFAULT_EPSILON};

use super::{known_keys, load_matrix, warn_unknown};
use crate::binary::write_pca;
use crate::error::CliResult;
use crate::params::Params;
use crate::run::Run;

pub const KEYS: &[&str] = &["descriptors", "epsilon", "out"];

/// Trains a full-rank whitening model on every row of a descriptor matrix.
pub fn cmd_pca_train(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let input = params.require_path("descriptors")?;
    let out = params.require_path("out")?;
    let epsilon = params.parse_or("epsilon", DEFAULT_EPSILON)?;
    let mut run = Run::new("pca-train", params);
    let m = load_matrix(&mut run, &input)?;
    let train: Vec<Descriptor> = (0..m.len()).map(|i| Descriptor::new(m.row(i).to_vec())).collect::<Result<_, _>>()?;
    let model = pca_train(&train, epsilon)?;
    write_pca(&out, &model)?;
    run.output(&out);
    run.finish()?;
    Ok(run)
}
