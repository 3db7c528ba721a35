use ndbench_core::evaluation::{auc_indicator, split_scores, EvalMode, ScoredPair};
use ndbench_core::index::FlatIndex;
use ndbench_core::mining::{mine, DescriptorSource, HardNegativeSet};
use ndbench_core::querysim::{build_design, pick_thresholds, predicted_fp_per_query, run_sim};
use ndbench_core::Error;

use super::project::{projection_rows, REFERENCE_DESIGNS};
use super::roc::{eval_mode, evaluate, ground_truth, load_relabel};
use super::simulate::{DEFAULT_CAPS, DEFAULT_FP_RATES};
use super::{known_keys, load_ids, load_index, load_pairs, mining_config, subset_index, warn_unknown};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::run::Run;
use crate::tables::{
    write_json, write_mined, write_projection, write_review, write_roc, write_sim, write_sim_fp_counts, BoundSummary,
    ProjectionRow, Summary,
};

pub const PIPELINE_KEYS: &[&str] = &[
    "descriptors",
    "pairs",
    "queries",
    "pool",
    "distractors",
    "relabel",
    "strategy",
    "knn_per_query",
    "total_pairs",
    "mode",
    "fp_rates",
    "caps",
    "bound_check",
    "bound_max_pairs",
    "out_dir",
];

const DEFAULT_BOUND_MAX_PAIRS: usize = 20_000_000;

/// AUC of the positives against every query × pool negative, beside the AUC
/// against the mined hard negatives (before any relabeling).
fn bound_summary(
    positives: &[ScoredPair],
    mode: EvalMode,
    pool: &FlatIndex,
    queries: &[String],
    all: &FlatIndex,
    mined: &HardNegativeSet,
) -> CliResult<BoundSummary> {
    let (pos, _) = split_scores(positives, mode);
    let mut vectors = Vec::with_capacity(queries.len());
    let mut exclude = Vec::with_capacity(queries.len());
    for q in queries {
        vectors.push(all.vector(q).ok_or_else(|| Error::MissingDescriptor(q.clone()))?);
        exclude.push(pool.position(q));
    }
    let full: Vec<f64> = pool
        .knn_batch(&vectors, pool.len(), Some(&exclude))?
        .into_iter()
        .flatten()
        .map(|n| n.distance as f64)
        .collect();
    let hard: Vec<f64> = mined.pairs.iter().map(|p| p.distance as f64).collect();
    let auc_full = auc_indicator(&pos, &full)?;
    let auc_hn = auc_indicator(&pos, &hard)?;
    Ok(BoundSummary {
        auc_full,
        n_neg_full: full.len(),
        hard_negative_auc_at_most_full: auc_hn <= auc_full,
        hard_negative_auc_at_least_full: auc_hn >= auc_full,
    })
}

/// Mining, evaluation, simulation and projection in one run. Writes
/// `mined.csv`, `mined_review.csv`, `roc.csv`, `summary.json`, `sim.csv`,
/// `sim_fp_counts.csv` and `projection.csv` under `out_dir`.
///
/// With `bound_check` (default on) the AUC over the mined negatives must
/// not exceed the AUC over all query × pool negatives; a violation is
/// reported after the artifacts are written.
pub fn cmd_pipeline(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(PIPELINE_KEYS));
    let desc_path = params.require_path("descriptors")?;
    let pairs_path = params.require_path("pairs")?;
    let q_path = params.require_path("queries")?;
    let p_path = params.require_path("pool")?;
    let d_path = params.path("distractors").unwrap_or_else(|| p_path.clone());
    let out_dir = params.require_path("out_dir")?;
    let cfg = mining_config(params)?;
    let mode = eval_mode(params)?;
    let fp_rates = params.f64_list_or("fp_rates", DEFAULT_FP_RATES)?;
    let caps = params.caps_or("caps", DEFAULT_CAPS)?;
    let bound_check = params.bool_or("bound_check", true)?;
    let bound_max_pairs = params.parse_or("bound_max_pairs", DEFAULT_BOUND_MAX_PAIRS)?;

    let mut run = Run::new("pipeline", params);
    let all = load_index(&mut run, &desc_path)?;
    let pairs = load_pairs(&mut run, &pairs_path)?;
    let queries = load_ids(&mut run, &q_path)?;
    let pool_ids = load_ids(&mut run, &p_path)?;
    let distractors = if d_path == p_path { pool_ids.clone() } else { load_ids(&mut run, &d_path)? };
    let relabel = load_relabel(&mut run, params)?;
    let (gt, positives) = ground_truth(pairs, &queries, &all)?;
    let pool = subset_index(&all, &pool_ids)?;

    let out = |name: &str| out_dir.join(name);
    let mined = mine(&pool, &queries, &all, &cfg)?;
    write_mined(&out("mined.csv"), &mined)?;
    write_review(&out("mined_review.csv"), &mined)?;

    let curve = evaluate(&positives, &mined, &relabel, mode, None)?;
    write_roc(&out("roc.csv"), &curve)?;
    let mut summary = Summary::new(&curve, mined.strategy.as_str());
    let design_pairs = queries.len().saturating_mul(pool.len());
    if bound_check {
        if design_pairs <= bound_max_pairs {
            summary.bound = Some(bound_summary(&positives, mode, &pool, &queries, &all, &mined)?);
        } else {
            log::warn!(
                "bound check skipped: {design_pairs} query × pool pairs exceed bound_max_pairs = {bound_max_pairs}"
            );
        }
    }
    write_json(&out("summary.json"), &summary)?;

    let thresholds = pick_thresholds(&curve, &fp_rates)?;
    let design = build_design(&gt, &all, &queries, &distractors, thresholds, caps)?;
    let result = run_sim(&design)?;
    write_sim(&out("sim.csv"), &result)?;
    write_sim_fp_counts(&out("sim_fp_counts.csv"), &result, &design.negative_queries)?;

    let mut rows = projection_rows("run", mined.queries, mined.pool, &fp_rates);
    rows.extend(fp_rates.iter().map(|&r| ProjectionRow {
        design: "run".into(),
        queries: mined.queries,
        pool: mined.pool,
        quantity: "predicted_fp_per_query".into(),
        mined_fp_rate: Some(r),
        value: predicted_fp_per_query(r, &mined, design.database.len()),
    }));
    for &(name, k, m) in REFERENCE_DESIGNS {
        rows.extend(projection_rows(name, k, m, &fp_rates));
    }
    write_projection(&out("projection.csv"), &rows)?;

    for name in
        ["mined.csv", "mined_review.csv", "roc.csv", "summary.json", "sim.csv", "sim_fp_counts.csv", "projection.csv"]
    {
        run.output(&out(name));
    }
    run.finish()?;

    if let Some(b) = &summary.bound {
        if !b.hard_negative_auc_at_most_full {
            return Err(CliError::Invariant(format!(
                "AUC on mined negatives {} exceeds AUC on all {} negatives {} (see {})",
                summary.auc,
                b.n_neg_full,
                b.auc_full,
                out("summary.json").display()
            )));
        }
    }
    Ok(run)
}
