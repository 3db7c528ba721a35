//! Range-query simulation: average recall over positive queries against
//! average false positives per negative query, for a set of thresholds and
//! result caps.
//!
//! Positive queries come from the ND clusters: the lexicographically first
//! member of each cluster is the query and the remaining members go into the
//! database. Negative queries have no ND in the database; every image they
//! retrieve is a false positive.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::GroundTruth;
use crate::error::{Error, Result};
use crate::evaluation::RocCurve;
use crate::index::{FlatIndex, Neighbor};
use crate::mining::{DescriptorSource, HardNegativeSet};

#[derive(Debug, Clone, PartialEq)]
pub struct PositiveQuery {
    pub query_id: String,
    pub expected: BTreeSet<String>,
}

#[derive(Debug, Clone)]
pub struct SimDesign {
    pub positive_queries: Vec<PositiveQuery>,
    pub negative_queries: Vec<String>,
    pub database: FlatIndex,
    /// Query vectors by id (queries are not in the database).
    pub query_vectors: BTreeMap<String, Vec<f32>>,
    pub thresholds: Vec<f64>,
    /// Result caps; `None` is uncapped.
    pub caps: Vec<Option<usize>>,
}

/// Builds the query/database split.
///
/// The database holds every non-query cluster member followed by the
/// distractors. Distractors that are negative queries or cluster members are
/// skipped.
pub fn build_design<S: DescriptorSource>(
    gt: &GroundTruth,
    source: &S,
    negative_queries: &[String],
    distractors: &[String],
    thresholds: Vec<f64>,
    caps: Vec<Option<usize>>,
) -> Result<SimDesign> {
    if gt.clusters().is_empty() {
        return Err(Error::Empty("ground truth has no ND clusters"));
    }
    let lookup = |id: &str| -> Result<Vec<f32>> {
        source.vector(id).map(<[f32]>::to_vec).ok_or_else(|| Error::MissingDescriptor(id.into()))
    };

    let mut positive_queries = Vec::with_capacity(gt.clusters().len());
    let mut query_vectors = BTreeMap::new();
    let mut db_ids: Vec<String> = Vec::new();
    let mut db_data: Vec<f32> = Vec::new();
    let mut in_db: BTreeSet<String> = BTreeSet::new();

    for c in gt.clusters() {
        let mut members = c.members.iter();
        let head = members.next().expect("clusters have >= 2 members").clone();
        query_vectors.insert(head.clone(), lookup(&head)?);
        let expected: BTreeSet<String> = members.cloned().collect();
        for m in &expected {
            db_data.extend(lookup(m)?);
            db_ids.push(m.clone());
            in_db.insert(m.clone());
        }
        positive_queries.push(PositiveQuery { query_id: head, expected });
    }

    let negatives: BTreeSet<&str> = negative_queries.iter().map(String::as_str).collect();
    for q in negative_queries {
        if gt.cluster_of(q).is_some() {
            return Err(Error::QueryInCluster(q.clone()));
        }
        query_vectors.insert(q.clone(), lookup(q)?);
    }
    for d in distractors {
        if negatives.contains(d.as_str()) || gt.cluster_of(d).is_some() || in_db.contains(d) {
            continue;
        }
        db_data.extend(lookup(d)?);
        db_ids.push(d.clone());
        in_db.insert(d.clone());
    }

    let dim = query_vectors.values().next().map(Vec::len).unwrap_or(0);
    Ok(SimDesign {
        positive_queries,
        negative_queries: negative_queries.to_vec(),
        database: FlatIndex::build(db_data, dim, db_ids)?,
        query_vectors,
        thresholds,
        caps,
    })
}

/// Metrics at one `(threshold, cap)` setting.
#[derive(Debug, Clone, PartialEq)]
pub struct SimCell {
    pub threshold: f64,
    pub cap: Option<usize>,
    pub avg_recall: f64,
    pub recall_se: f64,
    pub avg_fp: f64,
    pub fp_se: f64,
    /// False positives of every negative query, in query order.
    pub fp_counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    /// Threshold-major, then caps in design order.
    pub cells: Vec<SimCell>,
}

impl SimResult {
    pub fn cell(&self, threshold: f64, cap: Option<usize>) -> Option<&SimCell> {
        self.cells.iter().find(|c| c.threshold == threshold && c.cap == cap)
    }
}

/// Mean and standard error (sample standard deviation / √n).
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, libm::sqrt(var) / libm::sqrt(n))
}

fn hits_within(hits: &[Neighbor], threshold: f64, cap: Option<usize>) -> &[Neighbor] {
    let below = hits.partition_point(|n| (n.distance as f64) < threshold);
    &hits[..cap.map_or(below, |c| below.min(c))]
}

pub fn run_sim(design: &SimDesign) -> Result<SimResult> {
    if design.thresholds.is_empty() || design.caps.is_empty() {
        return Err(Error::Empty("thresholds and caps"));
    }
    if design.thresholds.iter().any(|t| t.is_nan() || *t <= 0.0) {
        return Err(Error::InvalidArgument("thresholds must be > 0".into()));
    }
    let t_max = design.thresholds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cap_max =
        if design.caps.iter().any(Option::is_none) { None } else { design.caps.iter().flatten().copied().max() };

    let vector = |id: &String| {
        design.query_vectors.get(id).map(Vec::as_slice).ok_or_else(|| Error::MissingDescriptor(id.clone()))
    };
    let pos_vecs: Vec<&[f32]> = design.positive_queries.iter().map(|q| vector(&q.query_id)).collect::<Result<_>>()?;
    let neg_vecs: Vec<&[f32]> = design.negative_queries.iter().map(vector).collect::<Result<_>>()?;

    let search_t = if t_max.is_infinite() { f32::INFINITY } else { t_max as f32 };
    let pos_hits = design.database.range_batch(&pos_vecs, search_t, cap_max, None)?;
    let neg_hits = design.database.range_batch(&neg_vecs, search_t, cap_max, None)?;

    let mut cells = Vec::with_capacity(design.thresholds.len() * design.caps.len());
    for &t in &design.thresholds {
        for &cap in &design.caps {
            let recalls: Vec<f64> = design
                .positive_queries
                .iter()
                .zip(&pos_hits)
                .map(|(q, hits)| {
                    let found = hits_within(hits, t, cap)
                        .iter()
                        .filter(|n| q.expected.contains(design.database.id(n.row)))
                        .count();
                    found as f64 / q.expected.len() as f64
                })
                .collect();
            let fp_counts: Vec<usize> = neg_hits.iter().map(|h| hits_within(h, t, cap).len()).collect();
            let fps: Vec<f64> = fp_counts.iter().map(|&c| c as f64).collect();
            let (avg_recall, recall_se) = mean_and_se(&recalls);
            let (avg_fp, fp_se) = mean_and_se(&fps);
            cells.push(SimCell { threshold: t, cap, avg_recall, recall_se, avg_fp, fp_se, fp_counts });
        }
    }
    Ok(SimResult { cells })
}

/// For each FP rate, the largest curve threshold whose FP rate on the mined
/// negatives does not exceed it.
pub fn pick_thresholds(roc: &RocCurve, fp_rates: &[f64]) -> Result<Vec<f64>> {
    let floor = 1.0 / roc.n_neg as f64;
    fp_rates
        .iter()
        .map(|&rate| {
            if rate.is_nan() || rate > 1.0 {
                return Err(Error::InvalidArgument(alloc::format!("FP rate {rate} exceeds 1")));
            }
            if rate < floor {
                return Err(Error::BelowSpecificityFloor { rate, n_neg: roc.n_neg, floor });
            }
            roc.threshold_at_fpr(rate).ok_or_else(|| Error::InvalidArgument("ROC curve has no points".into()))
        })
        .collect()
}

/// Expected FPs per negative query at a threshold with FP rate `rate` on the
/// mined set, for a database of `database_size` images.
///
/// `rate·H` of the `K·M` pairs fall below the threshold, so the projected
/// collection FP rate is `rate·H/(K·M)`; for `hn1` (`H = K`) this is
/// `rate/M` and a database equal to the pool gives `rate` FPs per query.
pub fn predicted_fp_per_query(rate: f64, mined: &HardNegativeSet, database_size: usize) -> f64 {
    rate * mined.len() as f64 / (mined.queries as f64 * mined.pool as f64) * database_size as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Label, NdPair};
    use crate::evaluation::roc_from_scores;
    use alloc::string::ToString;
    use alloc::vec;

    fn source(points: &[(&str, f32)]) -> BTreeMap<String, Vec<f32>> {
        points.iter().map(|(id, x)| (id.to_string(), vec![*x])).collect()
    }

    fn one_cluster() -> GroundTruth {
        let pairs = vec![NdPair::new("a", "b", Label::Ind).unwrap(), NdPair::new("b", "c", Label::Ind).unwrap()];
        GroundTruth::new(pairs, BTreeSet::new()).unwrap()
    }

    #[test]
    fn cluster_head_is_query() {
        let src = source(&[("a", 0.0), ("b", 1.0), ("c", 2.0), ("n", 50.0), ("d", 10.0)]);
        let design = build_design(
            &one_cluster(),
            &src,
            &["n".to_string()],
            &["d".to_string(), "n".to_string(), "b".to_string()],
            vec![1.5],
            vec![None],
        )
        .unwrap();
        assert_eq!(design.positive_queries[0].query_id, "a");
        assert_eq!(design.positive_queries[0].expected.len(), 2);
        assert_eq!(design.database.ids(), &["b", "c", "d"]);
    }

    #[test]
    fn empty_ground_truth_rejected() {
        let gt = GroundTruth::new(vec![], BTreeSet::new()).unwrap();
        let src = source(&[]);
        assert!(build_design(&gt, &src, &[], &[], vec![1.0], vec![None]).is_err());
    }

    #[test]
    fn negative_query_in_cluster_rejected() {
        let src = source(&[("a", 0.0), ("b", 1.0), ("c", 2.0)]);
        assert!(matches!(
            build_design(&one_cluster(), &src, &["b".to_string()], &[], vec![1.0], vec![None]),
            Err(Error::QueryInCluster(_))
        ));
    }

    #[test]
    fn recall_and_fps() {
        let src = source(&[("a", 0.0), ("b", 1.0), ("c", 2.0), ("n", 20.0), ("d", 20.5), ("e", 21.5)]);
        let design = build_design(
            &one_cluster(),
            &src,
            &["n".to_string()],
            &["d".to_string(), "e".to_string()],
            vec![0.1, 1.2, 2.2],
            vec![Some(1), None],
        )
        .unwrap();
        let r = run_sim(&design).unwrap();
        assert_eq!(r.cells.len(), 6);
        let low = r.cell(0.1, None).unwrap();
        assert_eq!((low.avg_recall, low.avg_fp), (0.0, 0.0));
        let mid = r.cell(1.2, None).unwrap();
        assert_eq!((mid.avg_recall, mid.avg_fp), (0.5, 1.0));
        let hi = r.cell(2.2, None).unwrap();
        assert_eq!((hi.avg_recall, hi.avg_fp), (1.0, 2.0));
        let capped = r.cell(2.2, Some(1)).unwrap();
        assert_eq!((capped.avg_recall, capped.avg_fp), (0.5, 1.0));
        assert_eq!(capped.fp_counts, vec![1]);
    }

    #[test]
    fn empty_settings_rejected() {
        let src = source(&[("a", 0.0), ("b", 1.0), ("c", 2.0)]);
        let design = build_design(&one_cluster(), &src, &[], &[], vec![], vec![None]).unwrap();
        assert!(run_sim(&design).is_err());
    }

    #[test]
    fn thresholds_from_curve() {
        let neg: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let curve = roc_from_scores(&[0.5], &neg).unwrap();
        let t = pick_thresholds(&curve, &[0.01, 0.1, 1.0]).unwrap();
        // the threshold admits exactly rate·N negatives strictly below it
        assert_eq!(t, vec![2.0, 11.0, f64::INFINITY]);
        assert!(matches!(pick_thresholds(&curve, &[0.001]), Err(Error::BelowSpecificityFloor { .. })));
    }

    #[test]
    fn standard_error() {
        assert_eq!(mean_and_se(&[1.0]), (1.0, 0.0));
        let (m, se) = mean_and_se(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((se - 1.0).abs() < 1e-12);
    }
}
