use ndbench_core::mining::mine;

use super::{known_keys, load_ids, load_index, mining_config, subset_index, warn_unknown};
use crate::error::CliResult;
use crate::params::Params;
use crate::run::Run;
use crate::tables::{write_mined, write_review};

pub const KEYS: &[&str] =
    &["descriptors", "queries", "pool", "strategy", "knn_per_query", "total_pairs", "out", "review"];

/// Mines hard negatives between a query list and a pool list, both resolved
/// against one descriptor matrix. `review` additionally writes the mined
/// pairs as an editable NND-labeled pairs file.
pub fn cmd_mine(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let desc_path = params.require_path("descriptors")?;
    let q_path = params.require_path("queries")?;
    let p_path = params.require_path("pool")?;
    let out = params.require_path("out")?;
    let cfg = mining_config(params)?;

    let mut run = Run::new("mine", params);
    let all = load_index(&mut run, &desc_path)?;
    let queries = load_ids(&mut run, &q_path)?;
    let pool_ids = load_ids(&mut run, &p_path)?;
    let pool = subset_index(&all, &pool_ids)?;
    let mined = mine(&pool, &queries, &all, &cfg)?;
    write_mined(&out, &mined)?;
    run.output(&out);
    if let Some(review) = params.path("review") {
        write_review(&review, &mined)?;
        run.output(&review);
    }
    run.finish()?;
    Ok(run)
}
