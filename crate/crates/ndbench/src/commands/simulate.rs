use ndbench_core::querysim::{build_design, pick_thresholds, run_sim};

use super::roc::{eval_mode, evaluate, ground_truth, load_mined, load_relabel};
use super::{input_error, known_keys, load_ids, load_index, load_pairs, warn_unknown};
use crate::error::CliResult;
use crate::params::Params;
use crate::run::Run;
use crate::tables::{write_sim, write_sim_fp_counts};

pub const KEYS: &[&str] = &[
    "descriptors",
    "pairs",
    "queries",
    "pool",
    "distractors",
    "thresholds",
    "mined",
    "relabel",
    "mode",
    "fp_rates",
    "caps",
    "out",
    "fp_counts",
];

pub(crate) const DEFAULT_FP_RATES: &[f64] = &[0.01, 0.1];
pub(crate) const DEFAULT_CAPS: &[Option<usize>] = &[None, Some(1), Some(10)];

/// Query simulation: the first image of each ND cluster queries a database
/// of the other cluster members plus distractors; negative queries count
/// false positives.
///
/// Thresholds are given directly (`thresholds`) or picked from the ROC of a
/// mined set at the requested FP rates (`mined`, `fp_rates`).
pub fn cmd_simulate(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let desc_path = params.require_path("descriptors")?;
    let pairs_path = params.require_path("pairs")?;
    let q_path = params.require_path("queries")?;
    let d_path = params.path("distractors").or_else(|| params.path("pool"));
    let d_path = d_path.ok_or_else(|| input_error("missing required setting `distractors`"))?;
    let out = params.require_path("out")?;
    let caps = params.caps_or("caps", DEFAULT_CAPS)?;

    let mut run = Run::new("simulate", params);
    let all = load_index(&mut run, &desc_path)?;
    let pairs = load_pairs(&mut run, &pairs_path)?;
    let queries = load_ids(&mut run, &q_path)?;
    let distractors = load_ids(&mut run, &d_path)?;
    let (gt, positives) = ground_truth(pairs, &queries, &all)?;

    let thresholds = if params.contains("thresholds") {
        params.f64_list_or("thresholds", &[])?
    } else if params.contains("mined") {
        let mined = load_mined(&mut run, params)?;
        let relabel = load_relabel(&mut run, params)?;
        let curve = evaluate(&positives, &mined, &relabel, eval_mode(params)?, None)?;
        pick_thresholds(&curve, &params.f64_list_or("fp_rates", DEFAULT_FP_RATES)?)?
    } else {
        return Err(input_error("simulate needs `thresholds`, or `mined` with `fp_rates`"));
    };

    let design = build_design(&gt, &all, &queries, &distractors, thresholds, caps)?;
    let result = run_sim(&design)?;
    write_sim(&out, &result)?;
    run.output(&out);
    if let Some(fp) = params.path("fp_counts") {
        write_sim_fp_counts(&fp, &result, &design.negative_queries)?;
        run.output(&fp);
    }
    run.finish()?;
    Ok(run)
}
