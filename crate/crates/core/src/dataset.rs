//! Image identities, near-duplicate ground truth and exact-duplicate removal.
//!
//! Ground truth is a set of labeled pairs. Positive pairs (IND or NIND) are
//! treated as a transitive relation: the connected components of the
//! positive-pair graph form the ND clusters.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use md5::{Digest, Md5};

use crate::error::{Error, Result};

/// 128-bit digest of a file's raw bytes.
pub type ContentHash = [u8; 16];

/// MD5 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> ContentHash {
    Md5::digest(bytes).into()
}

pub fn hash_to_hex(hash: &ContentHash) -> String {
    use core::fmt::Write;
    let mut s = String::with_capacity(32);
    for b in hash {
        let _ = write!(s, "{b:02x}");
    }
    s
}

pub fn hash_from_hex(hex: &str) -> Result<ContentHash> {
    let hex = hex.trim();
    if hex.len() != 32 || !hex.is_ascii() {
        return Err(Error::InvalidArgument(alloc::format!("bad md5 hex digest {hex:?}")));
    }
    let mut out = [0u8; 16];
    for (i, chunk) in hex.as_bytes().chunks(2).enumerate() {
        let s = core::str::from_utf8(chunk).expect("ascii");
        out[i] = u8::from_str_radix(s, 16)
            .map_err(|_| Error::InvalidArgument(alloc::format!("bad md5 hex digest {hex:?}")))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageRecord {
    pub id: String,
    pub path: String,
    pub content_hash: ContentHash,
}

impl ImageRecord {
    pub fn new(id: impl Into<String>, path: impl Into<String>, content_hash: ContentHash) -> Self {
        Self { id: id.into(), path: path.into(), content_hash }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DedupOutcome {
    /// Surviving records, in input order.
    pub kept: Vec<ImageRecord>,
    /// `(removed id, id of the kept representative)`.
    pub removed: Vec<(String, String)>,
}

/// Drops exact duplicates. Among records sharing a content hash the one with
/// the smallest id survives.
pub fn dedup_exact(records: Vec<ImageRecord>) -> DedupOutcome {
    let mut representative: BTreeMap<ContentHash, &str> = BTreeMap::new();
    for r in &records {
        representative
            .entry(r.content_hash)
            .and_modify(|cur| {
                if r.id.as_str() < *cur {
                    *cur = r.id.as_str();
                }
            })
            .or_insert(r.id.as_str());
    }
    let representative: BTreeMap<ContentHash, String> =
        representative.into_iter().map(|(h, id)| (h, id.to_string())).collect();

    let mut out = DedupOutcome::default();
    for r in records {
        let rep = &representative[&r.content_hash];
        if *rep == r.id {
            out.kept.push(r);
        } else {
            out.removed.push((r.id, rep.clone()));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// Identical near-duplicate: digitally derived from the same source.
    Ind,
    /// Non-identical near-duplicate: same scene, different shot.
    Nind,
    /// Not a near-duplicate.
    Nnd,
}

impl Label {
    pub fn is_positive(self) -> bool {
        !matches!(self, Label::Nnd)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ind => "IND",
            Label::Nind => "NIND",
            Label::Nnd => "NND",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "IND" => Ok(Label::Ind),
            "NIND" => Ok(Label::Nind),
            "NND" => Ok(Label::Nnd),
            other => Err(Error::InvalidArgument(alloc::format!("unknown label {other:?}"))),
        }
    }
}

/// An unordered, labeled image pair. `id_a < id_b` always holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NdPair {
    id_a: String,
    id_b: String,
    pub label: Label,
}

impl NdPair {
    pub fn new(a: impl Into<String>, b: impl Into<String>, label: Label) -> Result<Self> {
        let (a, b) = (a.into(), b.into());
        match a.cmp(&b) {
            core::cmp::Ordering::Less => Ok(Self { id_a: a, id_b: b, label }),
            core::cmp::Ordering::Greater => Ok(Self { id_a: b, id_b: a, label }),
            core::cmp::Ordering::Equal => Err(Error::SelfPair(a, b)),
        }
    }

    pub fn id_a(&self) -> &str {
        &self.id_a
    }

    pub fn id_b(&self) -> &str {
        &self.id_b
    }

    pub fn key(&self) -> (&str, &str) {
        (&self.id_a, &self.id_b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClusterKind {
    Ind,
    Nind,
}

impl ClusterKind {
    pub fn label(self) -> Label {
        match self {
            ClusterKind::Ind => Label::Ind,
            ClusterKind::Nind => Label::Nind,
        }
    }

    pub fn as_str(self) -> &'static str {
        self.label().as_str()
    }
}

impl FromStr for ClusterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<Label>()? {
            Label::Ind => Ok(ClusterKind::Ind),
            Label::Nind => Ok(ClusterKind::Nind),
            Label::Nnd => Err(Error::InvalidArgument("cluster kind cannot be NND".to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdCluster {
    pub cluster_id: u32,
    pub kind: ClusterKind,
    pub members: BTreeSet<String>,
    /// Set when the component contained both IND and NIND edges. The
    /// component is then typed NIND.
    pub mixed: bool,
}

impl NdCluster {
    pub fn new(cluster_id: u32, kind: ClusterKind, members: BTreeSet<String>) -> Result<Self> {
        if members.len() < 2 {
            return Err(Error::InvalidArgument(alloc::format!(
                "cluster {cluster_id} has {} member(s), at least 2 required",
                members.len()
            )));
        }
        Ok(Self { cluster_id, kind, members, mixed: false })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // smaller root wins so the result does not depend on edge order
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Connected components of the positive-pair graph.
///
/// Clusters are ordered by their smallest member id and numbered from 0. A
/// component containing any NIND edge is typed NIND; if it also contains an
/// IND edge it is flagged `mixed`.
pub fn build_clusters<'a, I>(pairs: I) -> Result<Vec<NdCluster>>
where
    I: IntoIterator<Item = &'a NdPair>,
{
    let pairs: Vec<&NdPair> = pairs.into_iter().collect();
    let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &pairs {
        if p.label == Label::Nnd {
            return Err(Error::NegativeInClusterInput(p.id_a.clone(), p.id_b.clone()));
        }
        ids.entry(p.id_a()).or_insert(0);
        ids.entry(p.id_b()).or_insert(0);
    }
    // ids sorted lexicographically, so index order = id order
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    let names: Vec<&str> = ids.keys().copied().collect();

    let mut uf = UnionFind::new(names.len());
    for p in &pairs {
        uf.union(ids[p.id_a()], ids[p.id_b()]);
    }

    let mut by_root: BTreeMap<usize, (BTreeSet<String>, bool, bool)> = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        let root = uf.find(i);
        by_root.entry(root).or_default().0.insert((*name).to_string());
    }
    for p in &pairs {
        let root = uf.find(ids[p.id_a()]);
        let entry = by_root.get_mut(&root).expect("root of a known node");
        match p.label {
            Label::Ind => entry.1 = true,
            Label::Nind => entry.2 = true,
            Label::Nnd => unreachable!(),
        }
    }

    // roots are the smallest index in each component, so BTreeMap order is
    // smallest-member order
    Ok(by_root
        .into_values()
        .enumerate()
        .map(|(i, (members, has_ind, has_nind))| NdCluster {
            cluster_id: i as u32,
            kind: if has_nind { ClusterKind::Nind } else { ClusterKind::Ind },
            members,
            mixed: has_ind && has_nind,
        })
        .collect())
}

/// All `C(n, 2)` unordered pairs of a cluster, labeled with the cluster kind.
pub fn enumerate_pairs(cluster: &NdCluster) -> Vec<NdPair> {
    let members: Vec<&String> = cluster.members.iter().collect();
    let label = cluster.kind.label();
    let mut out = Vec::with_capacity(members.len() * members.len().saturating_sub(1) / 2);
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            out.push(NdPair { id_a: (*a).clone(), id_b: (*b).clone(), label });
        }
    }
    out
}

/// Labeled pairs, the ND clusters they induce, and the negative query set.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pairs: BTreeMap<(String, String), Label>,
    clusters: Vec<NdCluster>,
    query_set: BTreeSet<String>,
    cluster_of: BTreeMap<String, u32>,
}

impl GroundTruth {
    pub fn new(pairs: Vec<NdPair>, query_set: BTreeSet<String>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for p in pairs {
            if map.contains_key(&(p.id_a.clone(), p.id_b.clone())) {
                return Err(Error::DuplicatePair(p.id_a, p.id_b));
            }
            map.insert((p.id_a, p.id_b), p.label);
        }
        let positives: Vec<NdPair> = map
            .iter()
            .filter(|(_, l)| l.is_positive())
            .map(|((a, b), l)| NdPair { id_a: a.clone(), id_b: b.clone(), label: *l })
            .collect();
        let clusters = build_clusters(&positives)?;

        let mut cluster_of = BTreeMap::new();
        for c in &clusters {
            for m in &c.members {
                cluster_of.insert(m.clone(), c.cluster_id);
            }
        }
        for ((a, b), l) in &map {
            if *l == Label::Nnd {
                if let (Some(ca), Some(cb)) = (cluster_of.get(a), cluster_of.get(b)) {
                    if ca == cb {
                        return Err(Error::NegativeInsideCluster(a.clone(), b.clone(), *ca));
                    }
                }
            }
        }
        if let Some(q) = query_set.iter().find(|q| cluster_of.contains_key(*q)) {
            return Err(Error::QueryInCluster(q.clone()));
        }
        Ok(Self { pairs: map, clusters, query_set, cluster_of })
    }

    pub fn pairs(&self) -> impl Iterator<Item = NdPair> + '_ {
        self.pairs.iter().map(|((a, b), l)| NdPair { id_a: a.clone(), id_b: b.clone(), label: *l })
    }

    pub fn label_of(&self, a: &str, b: &str) -> Option<Label> {
        let key = if a < b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.pairs.get(&key).copied()
    }

    pub fn clusters(&self) -> &[NdCluster] {
        &self.clusters
    }

    pub fn query_set(&self) -> &BTreeSet<String> {
        &self.query_set
    }

    pub fn cluster_of(&self, id: &str) -> Option<u32> {
        self.cluster_of.get(id).copied()
    }

    /// Every positive pair implied by transitive closure. Pairs that were
    /// labeled explicitly keep their label; inferred pairs take the cluster
    /// kind.
    pub fn closure_pairs(&self) -> Vec<NdPair> {
        let mut out = Vec::new();
        for c in &self.clusters {
            for mut p in enumerate_pairs(c) {
                if let Some(l) = self.pairs.get(&(p.id_a.clone(), p.id_b.clone())) {
                    p.label = *l;
                }
                out.push(p);
            }
        }
        out
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.query_set.is_empty()
    }
}
