//! CSV and JSON formats: pairs, clusters, image manifests, mined pairs, ROC
//! curves, summaries, simulation grids and projection tables.

use std::fs;
use std::path::Path;

use ndbench_core::dataset::{hash_from_hex, ClusterKind, ImageRecord, Label, NdCluster, NdPair};
use ndbench_core::evaluation::RocCurve;
use ndbench_core::mining::{HardNegativeSet, MinedPair, Strategy};
use ndbench_core::querysim::SimResult;
use serde::{Deserialize, Serialize};

use crate::binary::write_bytes;
use crate::error::{CliError, CliResult};

fn reader(path: &Path) -> CliResult<csv::Reader<fs::File>> {
    let f = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(f))
}

fn rows<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    reader(path)?
        .deserialize()
        .enumerate()
        .map(|(i, r)| r.map_err(|e| CliError::format(path, format!("row {}: {e}", i + 1))))
        .collect()
}

fn write_rows<T: Serialize>(path: &Path, header: &[&str], items: impl IntoIterator<Item = T>) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::format(path, e.to_string());
    w.write_record(header).map_err(fail)?;
    for item in items {
        w.serialize(item).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::format(path, e.to_string()))?;
    write_bytes(path, &bytes)
}

/// One id per line; blank lines and `#` comments are skipped.
pub fn read_id_list(path: &Path) -> CliResult<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect())
}

pub fn write_id_list(path: &Path, ids: &[String]) -> CliResult<()> {
    let mut s = String::new();
    for id in ids {
        s.push_str(id);
        s.push('\n');
    }
    write_bytes(path, s.as_bytes())
}

#[derive(Serialize, Deserialize)]
struct PairRow {
    id_a: String,
    id_b: String,
    label: String,
}

pub fn read_pairs(path: &Path) -> CliResult<Vec<NdPair>> {
    rows::<PairRow>(path)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let label: Label = r
                .label
                .parse()
                .map_err(|e: ndbench_core::Error| CliError::format(path, format!("row {}: {e}", i + 1)))?;
            NdPair::new(r.id_a, r.id_b, label).map_err(|e| CliError::format(path, format!("row {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_pairs(path: &Path, pairs: &[NdPair]) -> CliResult<()> {
    write_rows(
        path,
        &["id_a", "id_b", "label"],
        pairs.iter().map(|p| PairRow { id_a: p.id_a().into(), id_b: p.id_b().into(), label: p.label.as_str().into() }),
    )
}

#[derive(Serialize, Deserialize)]
struct ClusterJson {
    cluster_id: u32,
    kind: String,
    members: Vec<String>,
    #[serde(default)]
    mixed: bool,
}

pub fn write_clusters(path: &Path, clusters: &[NdCluster]) -> CliResult<()> {
    let items: Vec<ClusterJson> = clusters
        .iter()
        .map(|c| ClusterJson {
            cluster_id: c.cluster_id,
            kind: c.kind.as_str().into(),
            members: c.members.iter().cloned().collect(),
            mixed: c.mixed,
        })
        .collect();
    write_json(path, &items)
}

pub fn read_clusters(path: &Path) -> CliResult<Vec<NdCluster>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let items: Vec<ClusterJson> = serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))?;
    items
        .into_iter()
        .map(|c| {
            let kind: ClusterKind =
                c.kind.parse().map_err(|e: ndbench_core::Error| CliError::format(path, e.to_string()))?;
            let mut cluster = NdCluster::new(c.cluster_id, kind, c.members.into_iter().collect())
                .map_err(|e| CliError::format(path, e.to_string()))?;
            cluster.mixed = c.mixed;
            Ok(cluster)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct ManifestRow {
    id: String,
    path: String,
    md5hex: String,
}

/// Image manifest rows. An empty `md5hex` is allowed; `content_hash` is then
/// all zeros and the hash is not checked.
pub fn read_image_manifest(path: &Path) -> CliResult<Vec<ImageRecord>> {
    rows::<ManifestRow>(path)?
        .into_iter()
        .map(|r| {
            let hash = if r.md5hex.is_empty() {
                [0u8; 16]
            } else {
                hash_from_hex(&r.md5hex).map_err(|e| CliError::format(path, format!("{}: {e}", r.id)))?
            };
            Ok(ImageRecord::new(r.id, r.path, hash))
        })
        .collect()
}

pub fn write_image_manifest(path: &Path, records: &[ImageRecord]) -> CliResult<()> {
    write_rows(
        path,
        &["id", "path", "md5hex"],
        records.iter().map(|r| ManifestRow {
            id: r.id.clone(),
            path: r.path.clone(),
            md5hex: ndbench_core::dataset::hash_to_hex(&r.content_hash),
        }),
    )
}

#[derive(Serialize, Deserialize)]
struct MinedRow {
    query_id: String,
    pool_id: String,
    distance: f32,
    strategy: String,
}

pub fn write_mined(path: &Path, set: &HardNegativeSet) -> CliResult<()> {
    write_rows(
        path,
        &["query_id", "pool_id", "distance", "strategy"],
        set.pairs.iter().map(|p| MinedRow {
            query_id: p.query_id.clone(),
            pool_id: p.pool_id.clone(),
            distance: p.distance,
            strategy: set.strategy.as_str().into(),
        }),
    )
}

/// Reads mined pairs back. `queries` and `pool` are the design sizes, which
/// the CSV does not carry.
pub fn read_mined(path: &Path, queries: usize, pool: usize) -> CliResult<HardNegativeSet> {
    let rows = rows::<MinedRow>(path)?;
    let strategy: Strategy = match rows.first() {
        Some(r) => r.strategy.parse().map_err(|e: ndbench_core::Error| CliError::format(path, e.to_string()))?,
        None => return Err(CliError::format(path, "no mined pairs")),
    };
    if rows.iter().any(|r| r.strategy != strategy.as_str()) {
        return Err(CliError::format(path, "mixed strategies in one file"));
    }
    Ok(HardNegativeSet {
        pairs: rows
            .into_iter()
            .map(|r| MinedPair { query_id: r.query_id, pool_id: r.pool_id, distance: r.distance })
            .collect(),
        strategy,
        queries,
        pool,
    })
}

/// Mined pairs as an editable pairs file, all labeled NND.
pub fn write_review(path: &Path, set: &HardNegativeSet) -> CliResult<()> {
    let pairs: Vec<NdPair> = set
        .pairs
        .iter()
        .map(|p| NdPair::new(p.query_id.as_str(), p.pool_id.as_str(), Label::Nnd))
        .collect::<Result<_, _>>()?;
    write_pairs(path, &pairs)
}

pub fn write_roc(path: &Path, curve: &RocCurve) -> CliResult<()> {
    #[derive(Serialize)]
    struct Row {
        threshold: f64,
        tpr: f64,
        fpr: f64,
    }
    write_rows(
        path,
        &["threshold", "tpr", "fpr"],
        curve.points.iter().map(|p| Row { threshold: p.threshold, tpr: p.tpr, fpr: p.fpr }),
    )
}

/// Summary of one ROC evaluation. The first six fields are the fixed
/// interface; the bound fields are present when the full negative set was
/// evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub auc: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<BoundSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub auc_full: f64,
    pub n_neg_full: usize,
    /// AUC on hard negatives at most the AUC on all negatives.
    pub hard_negative_auc_at_most_full: bool,
    /// AUC on hard negatives at least the AUC on all negatives.
    pub hard_negative_auc_at_least_full: bool,
}

impl Summary {
    pub fn new(curve: &RocCurve, strategy: &str) -> Self {
        Self {
            auc: curve.auc,
            ci_low: curve.auc_ci_95.0,
            ci_high: curve.auc_ci_95.1,
            n_pos: curve.n_pos,
            n_neg: curve.n_neg,
            strategy: strategy.into(),
            bound: None,
        }
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::format(path, e.to_string()))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn read_summary(path: &Path) -> CliResult<Summary> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

fn cap_str(cap: Option<usize>) -> String {
    cap.map_or_else(|| "none".into(), |c| c.to_string())
}

pub fn write_sim(path: &Path, result: &SimResult) -> CliResult<()> {
    #[derive(Serialize)]
    struct Row {
        threshold: f64,
        cap: String,
        avg_recall: f64,
        recall_se: f64,
        avg_fp: f64,
        fp_se: f64,
    }
    write_rows(
        path,
        &["threshold", "cap", "avg_recall", "recall_se", "avg_fp", "fp_se"],
        result.cells.iter().map(|c| Row {
            threshold: c.threshold,
            cap: cap_str(c.cap),
            avg_recall: c.avg_recall,
            recall_se: c.recall_se,
            avg_fp: c.avg_fp,
            fp_se: c.fp_se,
        }),
    )
}

/// Per-query false positive counts behind each simulation cell.
pub fn write_sim_fp_counts(path: &Path, result: &SimResult, queries: &[String]) -> CliResult<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        threshold: f64,
        cap: String,
        query_id: &'a str,
        fp_count: usize,
    }
    write_rows(
        path,
        &["threshold", "cap", "query_id", "fp_count"],
        result.cells.iter().flat_map(|c| {
            queries.iter().zip(&c.fp_counts).map(move |(q, &n)| Row {
                threshold: c.threshold,
                cap: cap_str(c.cap),
                query_id: q,
                fp_count: n,
            })
        }),
    )
}

/// One line of a projection table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub design: String,
    pub queries: usize,
    pub pool: usize,
    /// `specificity_floor` or `projected_fp_rate`.
    pub quantity: String,
    /// FP rate measured on the mined pairs; empty for the floor.
    pub mined_fp_rate: Option<f64>,
    pub value: f64,
}

pub fn write_projection(path: &Path, rows: &[ProjectionRow]) -> CliResult<()> {
    write_rows(path, &["design", "queries", "pool", "quantity", "mined_fp_rate", "value"], rows)
}

pub fn read_projection(path: &Path) -> CliResult<Vec<ProjectionRow>> {
    rows(path)
}
