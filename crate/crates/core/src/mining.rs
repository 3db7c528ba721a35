//! Hard negative mining.
//!
//! A set of `K` query images, assumed to have no near duplicate in a pool of
//! `M` images, yields `K × M` NND pairs. Only the hardest of them (smallest
//! distances) are kept for ROC analysis:
//!
//! * `hn1`: the nearest pool image of every query (exactly `K` pairs);
//! * `hn2`: the `knn_per_query` nearest pool images of every query, pooled
//!   and sorted, keeping the `total_pairs` smallest distances overall.
//!
//! With `knn_per_query = M`, `hn2` selects the true global minimum over all
//! `K × M` pairs. With fewer neighbors per query the candidate set can miss
//! pairs that are globally small but ranked low for their own query.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::dataset::{Label, NdPair};
use crate::error::{Error, Result};
use crate::evaluation::ScoredPair;
use crate::index::FlatIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Hn1,
    Hn2,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Hn1 => "hn1",
            Strategy::Hn2 => "hn2",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hn1" => Ok(Strategy::Hn1),
            "hn2" => Ok(Strategy::Hn2),
            other => Err(Error::InvalidArgument(alloc::format!("unknown mining strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiningConfig {
    pub strategy: Strategy,
    /// Neighbors retrieved per query (`hn2`).
    pub knn_per_query: usize,
    /// Pairs kept after the global sort (`hn2`).
    pub total_pairs: usize,
}

impl Default for MiningConfig {
    fn default() -> Self {
        Self { strategy: Strategy::Hn2, knn_per_query: 10, total_pairs: 10_000 }
    }
}

impl MiningConfig {
    pub fn hn1() -> Self {
        Self { strategy: Strategy::Hn1, ..Default::default() }
    }

    pub fn hn2(knn_per_query: usize, total_pairs: usize) -> Self {
        Self { strategy: Strategy::Hn2, knn_per_query, total_pairs }
    }
}

/// Lookup of descriptor vectors by image id.
pub trait DescriptorSource {
    fn vector(&self, id: &str) -> Option<&[f32]>;
}

impl DescriptorSource for FlatIndex {
    fn vector(&self, id: &str) -> Option<&[f32]> {
        self.position(id).map(|i| self.row(i))
    }
}

impl DescriptorSource for BTreeMap<String, Vec<f32>> {
    fn vector(&self, id: &str) -> Option<&[f32]> {
        self.get(id).map(Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinedPair {
    pub query_id: String,
    pub pool_id: String,
    pub distance: f32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HardNegativeSet {
    pub pairs: Vec<MinedPair>,
    pub strategy: Strategy,
    /// Number of queries `K`.
    pub queries: usize,
    /// Pool size `M`.
    pub pool: usize,
}

impl HardNegativeSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Smallest FP rate this design can measure, `1/(K·M)`.
    pub fn specificity_floor(&self) -> f64 {
        specificity_floor(self.queries, self.pool)
    }

    /// Mined pairs as NND-labeled scored pairs.
    pub fn scored_pairs(&self) -> Result<Vec<ScoredPair>> {
        self.pairs
            .iter()
            .map(|p| {
                ScoredPair::new(NdPair::new(p.query_id.as_str(), p.pool_id.as_str(), Label::Nnd)?, p.distance as f64)
            })
            .collect()
    }

    /// Moves pairs relabeled as IND/NIND out of the negative set.
    ///
    /// Returns the remaining negatives and the relabeled positives (with their
    /// distances). Relabel entries with label NND or unknown pairs are ignored.
    pub fn split_relabeled(&self, relabel: &[NdPair]) -> Result<(HardNegativeSet, Vec<ScoredPair>)> {
        let positives: BTreeMap<(&str, &str), Label> =
            relabel.iter().filter(|p| p.label.is_positive()).map(|p| (p.key(), p.label)).collect();
        let mut kept = Vec::with_capacity(self.pairs.len());
        let mut moved = Vec::new();
        for p in &self.pairs {
            let pair = NdPair::new(p.query_id.as_str(), p.pool_id.as_str(), Label::Nnd)?;
            match positives.get(&pair.key()) {
                Some(&label) => {
                    let pos = NdPair::new(pair.id_a(), pair.id_b(), label)?;
                    moved.push(ScoredPair::new(pos, p.distance as f64)?);
                }
                None => kept.push(p.clone()),
            }
        }
        Ok((HardNegativeSet { pairs: kept, ..self.clone() }, moved))
    }
}

/// Query vectors and, per query, the pool row to exclude (its own).
type ResolvedQueries<'a> = (Vec<&'a [f32]>, Vec<Option<usize>>);

fn resolve_queries<'a, S: DescriptorSource>(
    pool: &FlatIndex,
    queries: &[String],
    source: &'a S,
) -> Result<ResolvedQueries<'a>> {
    if queries.is_empty() {
        return Err(Error::Empty("query set"));
    }
    let mut vectors = Vec::with_capacity(queries.len());
    let mut exclude = Vec::with_capacity(queries.len());
    for q in queries {
        let v = source.vector(q).ok_or_else(|| Error::MissingDescriptor(q.clone()))?;
        if v.len() != pool.dim() {
            return Err(Error::DimensionMismatch { expected: pool.dim(), actual: v.len() });
        }
        vectors.push(v);
        // a query that is also in the pool must not match itself
        exclude.push(pool.position(q));
    }
    Ok((vectors, exclude))
}

/// `hn1`: each query paired with its nearest pool image.
pub fn mine_hn1<S: DescriptorSource>(pool: &FlatIndex, queries: &[String], source: &S) -> Result<HardNegativeSet> {
    let (vectors, exclude) = resolve_queries(pool, queries, source)?;
    let hits = pool.knn_batch(&vectors, 1, Some(&exclude))?;
    let mut pairs = Vec::with_capacity(queries.len());
    for (q, h) in queries.iter().zip(hits) {
        let n = h
            .first()
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("pool holds no image other than query {q}")))?;
        pairs.push(MinedPair { query_id: q.clone(), pool_id: pool.id(n.row).to_string(), distance: n.distance });
    }
    Ok(HardNegativeSet { pairs, strategy: Strategy::Hn1, queries: queries.len(), pool: pool.len() })
}

/// `hn2`: the `total_pairs` smallest distances among each query's
/// `knn_per_query` nearest pool images, sorted ascending.
pub fn mine_hn2<S: DescriptorSource>(
    pool: &FlatIndex,
    queries: &[String],
    source: &S,
    cfg: &MiningConfig,
) -> Result<HardNegativeSet> {
    if cfg.knn_per_query == 0 || cfg.total_pairs == 0 {
        return Err(Error::InvalidArgument("knn_per_query and total_pairs must be >= 1".into()));
    }
    let (vectors, exclude) = resolve_queries(pool, queries, source)?;
    let hits = pool.knn_batch(&vectors, cfg.knn_per_query, Some(&exclude))?;

    let mut seen: BTreeSet<(&str, usize)> = BTreeSet::new();
    let mut candidates: Vec<(f32, usize, usize)> = Vec::new();
    for (qi, h) in hits.iter().enumerate() {
        for n in h {
            if seen.insert((queries[qi].as_str(), n.row)) {
                candidates.push((n.distance, qi, n.row));
            }
        }
    }
    candidates.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    candidates.truncate(cfg.total_pairs);

    Ok(HardNegativeSet {
        pairs: candidates
            .into_iter()
            .map(|(d, qi, row)| MinedPair {
                query_id: queries[qi].clone(),
                pool_id: pool.id(row).to_string(),
                distance: d,
            })
            .collect(),
        strategy: Strategy::Hn2,
        queries: queries.len(),
        pool: pool.len(),
    })
}

/// Dispatches on `cfg.strategy`.
pub fn mine<S: DescriptorSource>(
    pool: &FlatIndex,
    queries: &[String],
    source: &S,
    cfg: &MiningConfig,
) -> Result<HardNegativeSet> {
    match cfg.strategy {
        Strategy::Hn1 => mine_hn1(pool, queries, source),
        Strategy::Hn2 => mine_hn2(pool, queries, source, cfg),
    }
}

/// `1/(K·M)`: the smallest FP rate observable from `K` queries over `M` images.
pub fn specificity_floor(queries: usize, pool: usize) -> f64 {
    1.0 / (queries as f64 * pool as f64)
}

/// Collection-level FP rate implied by an FP rate measured on mined pairs:
/// a rate `r` leaves at least `r·K` of the `K·M` pairs undiscarded, i.e. `r/M`.
pub fn project_fp_rate(fp_rate_on_mined: f64, pool: usize) -> f64 {
    fp_rate_on_mined / pool as f64
}
