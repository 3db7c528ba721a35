//! One module per command. Each reads its settings from [`Params`], writes
//! its outputs and returns the [`Run`] describing them.

mod aggregate;
mod fixture;
mod gist;
mod index;
mod mine;
mod pca;
mod pipeline;
mod project;
mod roc;
mod simulate;

pub use aggregate::cmd_aggregate;
pub use fixture::{cmd_fixture, FixtureConfig};
pub use gist::cmd_gist;
pub use index::cmd_index;
pub use mine::cmd_mine;
pub use pca::cmd_pca_train;
pub use pipeline::{cmd_pipeline, PIPELINE_KEYS};
pub use project::{cmd_project, projection_rows, REFERENCE_DESIGNS};
pub use roc::cmd_roc;
pub use simulate::cmd_simulate;

use std::path::Path;

use ndbench_core::dataset::{GroundTruth, NdPair};
use ndbench_core::evaluation::ScoredPair;
use ndbench_core::index::{l2, FlatIndex};
use ndbench_core::mining::{DescriptorSource, MiningConfig, Strategy};
use ndbench_core::Error;

use crate::binary::{ids_path, read_matrix, DescriptorMatrix};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::run::Run;
use crate::tables::{read_id_list, read_pairs};

pub(crate) fn load_matrix(run: &mut Run, path: &Path) -> CliResult<DescriptorMatrix> {
    let m = read_matrix(path)?;
    run.input(path)?;
    run.input(&ids_path(path))?;
    Ok(m)
}

pub(crate) fn load_index(run: &mut Run, path: &Path) -> CliResult<FlatIndex> {
    load_matrix(run, path)?.into_index()
}

pub(crate) fn load_ids(run: &mut Run, path: &Path) -> CliResult<Vec<String>> {
    let ids = read_id_list(path)?;
    run.input(path)?;
    Ok(ids)
}

pub(crate) fn load_pairs(run: &mut Run, path: &Path) -> CliResult<Vec<NdPair>> {
    let pairs = read_pairs(path)?;
    run.input(path)?;
    Ok(pairs)
}

/// Index over the given rows of `all`, in the given order.
pub(crate) fn subset_index(all: &FlatIndex, ids: &[String]) -> CliResult<FlatIndex> {
    let mut data = Vec::with_capacity(ids.len() * all.dim());
    for id in ids {
        let row = all.position(id).ok_or_else(|| Error::MissingDescriptor(id.clone()))?;
        data.extend_from_slice(all.row(row));
    }
    Ok(FlatIndex::build(data, all.dim(), ids.to_vec())?)
}

/// Every ND pair of the ground-truth closure, scored by descriptor distance.
pub(crate) fn score_positives<S: DescriptorSource>(gt: &GroundTruth, source: &S) -> CliResult<Vec<ScoredPair>> {
    gt.closure_pairs()
        .into_iter()
        .filter(|p| p.label.is_positive())
        .map(|p| {
            let v = |id: &str| source.vector(id).ok_or_else(|| Error::MissingDescriptor(id.into()));
            let d = l2(v(p.id_a())?, v(p.id_b())?) as f64;
            Ok(ScoredPair::new(p, d)?)
        })
        .collect()
}

pub(crate) fn mining_config(params: &Params) -> CliResult<MiningConfig> {
    let defaults = MiningConfig::default();
    let strategy: Strategy = params.parse_or("strategy", Strategy::Hn2)?;
    Ok(MiningConfig {
        strategy,
        knn_per_query: params.parse_or("knn_per_query", defaults.knn_per_query)?,
        total_pairs: params.parse_or("total_pairs", defaults.total_pairs)?,
    })
}

pub(crate) fn warn_unknown(params: &Params, known: &[&str]) {
    for k in params.unknown_keys(known) {
        log::warn!("ignoring unknown setting `{k}`");
    }
}

pub(crate) fn input_error(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Settings every command accepts.
pub(crate) const COMMON_KEYS: &[&str] = &["config", "seed", "threads"];

pub(crate) fn known_keys<'a>(own: &[&'a str]) -> Vec<&'a str> {
    COMMON_KEYS.iter().chain(own).copied().collect()
}
