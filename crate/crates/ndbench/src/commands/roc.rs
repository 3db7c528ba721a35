use std::collections::{BTreeSet, HashSet};

use ndbench_core::dataset::{GroundTruth, NdPair};
use ndbench_core::evaluation::{roc_grid, roc_with_mode, EvalMode, RocCurve, ScoredPair};
use ndbench_core::index::FlatIndex;
use ndbench_core::mining::HardNegativeSet;

use super::{input_error, known_keys, load_ids, load_index, load_pairs, score_positives, warn_unknown};
use crate::error::CliResult;
use crate::params::Params;
use crate::run::Run;
use crate::tables::{read_mined, write_json, write_roc, Summary};

pub const KEYS: &[&str] =
    &["descriptors", "pairs", "queries", "pool", "mined", "relabel", "mode", "grid", "out", "summary"];

pub(crate) fn eval_mode(params: &Params) -> CliResult<EvalMode> {
    match params.get("mode").unwrap_or("all") {
        "all" => Ok(EvalMode::All),
        "ind" => Ok(EvalMode::IndOnly),
        other => Err(input_error(format!("unknown evaluation mode {other:?} (all|ind)"))),
    }
}

/// Ground truth from a pairs file plus the negative query list, with every
/// labeled positive scored against the descriptors.
pub(crate) fn ground_truth(
    pairs: Vec<NdPair>,
    queries: &[String],
    all: &FlatIndex,
) -> CliResult<(GroundTruth, Vec<ScoredPair>)> {
    let gt = GroundTruth::new(pairs, queries.iter().cloned().collect::<BTreeSet<_>>())?;
    let positives = score_positives(&gt, all)?;
    if positives.is_empty() {
        return Err(input_error("ground truth has no ND pairs"));
    }
    Ok((gt, positives))
}

/// ROC over the ground-truth positives and the mined negatives. Mined pairs
/// relabeled as ND move from the negatives to the positives.
pub(crate) fn evaluate(
    positives: &[ScoredPair],
    mined: &HardNegativeSet,
    relabel: &[NdPair],
    mode: EvalMode,
    grid: Option<usize>,
) -> CliResult<RocCurve> {
    let mined_keys: HashSet<(&str, &str)> = mined
        .pairs
        .iter()
        .map(|p| {
            if p.query_id <= p.pool_id {
                (p.query_id.as_str(), p.pool_id.as_str())
            } else {
                (p.pool_id.as_str(), p.query_id.as_str())
            }
        })
        .collect();
    let stray = relabel.iter().filter(|p| p.label.is_positive() && !mined_keys.contains(&p.key())).count();
    if stray > 0 {
        log::warn!("{stray} relabeled pairs are not among the mined pairs and are ignored");
    }
    let (negatives, moved) = mined.split_relabeled(relabel)?;
    let mut pairs = positives.to_vec();
    pairs.extend(moved);
    pairs.extend(negatives.scored_pairs()?);
    Ok(match grid {
        Some(g) => roc_grid(&pairs, mode, g)?,
        None => roc_with_mode(&pairs, mode)?,
    })
}

/// Reads a mined-pairs file; the design size `K` is the number of distinct
/// queries and `M` the pool list length when given.
pub(crate) fn load_mined(run: &mut Run, params: &Params) -> CliResult<HardNegativeSet> {
    let path = params.require_path("mined")?;
    let mut set = read_mined(&path, 0, 0)?;
    run.input(&path)?;
    set.queries = set.pairs.iter().map(|p| p.query_id.as_str()).collect::<BTreeSet<_>>().len();
    set.pool = match params.path("pool") {
        Some(p) => load_ids(run, &p)?.len(),
        None => set.pairs.iter().map(|p| p.pool_id.as_str()).collect::<BTreeSet<_>>().len(),
    };
    Ok(set)
}

pub(crate) fn load_relabel(run: &mut Run, params: &Params) -> CliResult<Vec<NdPair>> {
    match params.path("relabel") {
        Some(p) => load_pairs(run, &p),
        None => Ok(Vec::new()),
    }
}

/// ROC curve and AUC summary of a mined negative set against the labeled
/// positives.
pub fn cmd_roc(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let desc_path = params.require_path("descriptors")?;
    let pairs_path = params.require_path("pairs")?;
    let out = params.require_path("out")?;
    let mode = eval_mode(params)?;
    let grid = params.get("grid").map(|_| params.parse_or("grid", 0usize)).transpose()?;

    let mut run = Run::new("roc", params);
    let all = load_index(&mut run, &desc_path)?;
    let pairs = load_pairs(&mut run, &pairs_path)?;
    let queries = match params.path("queries") {
        Some(p) => load_ids(&mut run, &p)?,
        None => Vec::new(),
    };
    let mined = load_mined(&mut run, params)?;
    let relabel = load_relabel(&mut run, params)?;
    let (_, positives) = ground_truth(pairs, &queries, &all)?;
    let curve = evaluate(&positives, &mined, &relabel, mode, grid)?;

    write_roc(&out, &curve)?;
    run.output(&out);
    if let Some(summary) = params.path("summary") {
        write_json(&summary, &Summary::new(&curve, mined.strategy.as_str()))?;
        run.output(&summary);
    }
    run.finish()?;
    Ok(run)
}
