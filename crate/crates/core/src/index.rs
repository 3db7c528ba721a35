//! Exact Euclidean search over a flat descriptor matrix.
//!
//! Distances are computed as squared L2 internally and square-rooted at the
//! boundary; thresholds are given in true L2 units. Ties are broken by
//! ascending row position, so results do not depend on how queries are
//! scheduled across threads.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::descriptors::Descriptor;
use crate::error::{Error, Result};

/// Default number of queries processed together in a batch.
pub const DEFAULT_QUERY_BLOCK: usize = 1024;

/// Rows scanned per tile; a tile of 512-d rows fits in L2.
const ROW_TILE: usize = 256;

/// Queries sharing one pass over a row tile.
const QUERY_GROUP: usize = 32;

const LANES: usize = 8;

/// `a·b + c` with a single rounding on every dispatch path.
#[inline(always)]
fn fmadd(a: f32, b: f32, c: f32) -> f32 {
    #[cfg(feature = "std")]
    {
        a.mul_add(b, c)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::fmaf(a, b, c)
    }
}

#[inline(always)]
fn accumulate(acc: &mut [f32; LANES], x: &[f32; LANES], y: &[f32; LANES]) {
    for i in 0..LANES {
        let d = x[i] - y[i];
        acc[i] = fmadd(d, d, acc[i]);
    }
}

/// Fixed pairwise reduction of the lanes.
#[inline(always)]
fn reduce(mut acc: [f32; LANES]) -> f32 {
    let mut width = LANES;
    while width > 1 {
        width /= 2;
        for i in 0..width {
            acc[i] += acc[i + width];
        }
    }
    acc[0]
}

#[inline(always)]
fn lanes(v: &[f32], at: usize) -> &[f32; LANES] {
    v[at..at + LANES].try_into().unwrap()
}

/// Zero-padded last partial chunk. Padding adds `fma(0, 0, acc) = acc`.
#[inline(always)]
fn padded_tail(v: &[f32], full: usize) -> [f32; LANES] {
    let mut t = [0.0f32; LANES];
    t[..v.len() - full].copy_from_slice(&v[full..]);
    t
}

/// Canonical squared distance: per-lane fused accumulation over chunks of
/// `LANES`, zero-padded tail, fixed reduction. Every kernel below performs
/// exactly this arithmetic for each (query, row) pair.
#[inline(always)]
fn squared_l2_body(a: &[f32], b: &[f32]) -> f32 {
    let full = a.len() / LANES * LANES;
    let mut acc = [0.0f32; LANES];
    let mut at = 0;
    while at < full {
        accumulate(&mut acc, lanes(a, at), lanes(b, at));
        at += LANES;
    }
    if full < a.len() {
        accumulate(&mut acc, &padded_tail(a, full), &padded_tail(b, full));
    }
    reduce(acc)
}

/// Four queries against two rows, sharing every load.
#[inline(always)]
fn block_4x2(q: [&[f32]; 4], r: [&[f32]; 2]) -> [[f32; 2]; 4] {
    let dim = r[0].len();
    let full = dim / LANES * LANES;
    let mut acc = [[[0.0f32; LANES]; 2]; 4];
    let mut at = 0;
    while at < full {
        let y = [lanes(r[0], at), lanes(r[1], at)];
        for (qi, a) in acc.iter_mut().enumerate() {
            let x = lanes(q[qi], at);
            accumulate(&mut a[0], x, y[0]);
            accumulate(&mut a[1], x, y[1]);
        }
        at += LANES;
    }
    if full < dim {
        let y = [padded_tail(r[0], full), padded_tail(r[1], full)];
        for (qi, a) in acc.iter_mut().enumerate() {
            let x = padded_tail(q[qi], full);
            accumulate(&mut a[0], &x, &y[0]);
            accumulate(&mut a[1], &x, &y[1]);
        }
    }
    acc.map(|a| a.map(reduce))
}

fn squared_l2_portable(a: &[f32], b: &[f32]) -> f32 {
    squared_l2_body(a, b)
}

#[cfg(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64")))]
#[target_feature(enable = "avx2,fma")]
unsafe fn squared_l2_avx2(a: &[f32], b: &[f32]) -> f32 {
    squared_l2_body(a, b)
}

/// Squared distances of every query to every row of a tile, query-major:
/// `out[q · rows + r]`.
#[inline(always)]
fn tile_body(queries: &[&[f32]], rows: &[f32], dim: usize, out: &mut [f32]) {
    let n = rows.len() / dim;
    let row = |r: usize| &rows[r * dim..(r + 1) * dim];
    let quads = queries.len() / 4 * 4;
    let row_pairs = n / 2 * 2;
    for q0 in (0..quads).step_by(4) {
        let qs = [queries[q0], queries[q0 + 1], queries[q0 + 2], queries[q0 + 3]];
        for r0 in (0..row_pairs).step_by(2) {
            let d = block_4x2(qs, [row(r0), row(r0 + 1)]);
            for (i, pair) in d.iter().enumerate() {
                out[(q0 + i) * n + r0] = pair[0];
                out[(q0 + i) * n + r0 + 1] = pair[1];
            }
        }
        if row_pairs < n {
            for (i, q) in qs.iter().enumerate() {
                out[(q0 + i) * n + n - 1] = squared_l2_body(q, row(n - 1));
            }
        }
    }
    for (qi, q) in queries.iter().enumerate().skip(quads) {
        for r in 0..n {
            out[qi * n + r] = squared_l2_body(q, row(r));
        }
    }
}

fn tile_portable(queries: &[&[f32]], rows: &[f32], dim: usize, out: &mut [f32]) {
    tile_body(queries, rows, dim, out)
}

#[cfg(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64")))]
#[target_feature(enable = "avx2,fma")]
unsafe fn tile_avx2(queries: &[&[f32]], rows: &[f32], dim: usize, out: &mut [f32]) {
    tile_body(queries, rows, dim, out)
}

#[cfg(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64")))]
fn has_avx2_fma() -> bool {
    std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma")
}

type TileKernel = fn(&[&[f32]], &[f32], usize, &mut [f32]);

#[cfg(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64")))]
fn select_tile_kernel() -> TileKernel {
    if has_avx2_fma() {
        // SAFETY: the CPU supports AVX2 and FMA, checked just above.
        |q, r, d, o| unsafe { tile_avx2(q, r, d, o) }
    } else {
        tile_portable
    }
}

#[cfg(not(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64"))))]
fn select_tile_kernel() -> TileKernel {
    tile_portable
}

type Kernel = fn(&[f32], &[f32]) -> f32;

#[cfg(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64")))]
fn select_kernel() -> Kernel {
    if has_avx2_fma() {
        // SAFETY: the CPU supports AVX2 and FMA, checked just above.
        |a, b| unsafe { squared_l2_avx2(a, b) }
    } else {
        squared_l2_portable
    }
}

#[cfg(not(all(feature = "std", any(target_arch = "x86", target_arch = "x86_64"))))]
fn select_kernel() -> Kernel {
    squared_l2_portable
}

/// Squared Euclidean distance. Both dispatch paths perform the same per-lane
/// arithmetic and return bit-identical results.
pub fn squared_l2(a: &[f32], b: &[f32]) -> f32 {
    assert_eq!(a.len(), b.len(), "vector lengths differ");
    select_kernel()(a, b)
}

/// Euclidean distance.
pub fn l2(a: &[f32], b: &[f32]) -> f32 {
    libm::sqrtf(squared_l2(a, b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub row: usize,
    pub distance: f32,
}

#[derive(Clone, Copy)]
struct Candidate {
    sq: f32,
    row: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Candidate {
    fn cmp(&self, o: &Self) -> Ordering {
        self.sq.total_cmp(&o.sq).then(self.row.cmp(&o.row))
    }
}

impl Candidate {
    fn neighbor(self) -> Neighbor {
        Neighbor { row: self.row, distance: libm::sqrtf(self.sq) }
    }
}

/// Per-query result accumulator.
trait Collector: Send {
    fn offer(&mut self, sq: f32, row: usize);
    fn finish(self) -> Vec<Neighbor>;
}

struct TopK {
    k: usize,
    exclude: Option<usize>,
    heap: BinaryHeap<Candidate>,
}

impl Collector for TopK {
    #[inline]
    fn offer(&mut self, sq: f32, row: usize) {
        if Some(row) == self.exclude {
            return;
        }
        let c = Candidate { sq, row };
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(mut top) = self.heap.peek_mut() {
            if c < *top {
                *top = c;
            }
        }
    }

    fn finish(self) -> Vec<Neighbor> {
        self.heap.into_sorted_vec().into_iter().map(Candidate::neighbor).collect()
    }
}

struct Range {
    threshold: f32,
    loose_sq: f32,
    cap: Option<usize>,
    exclude: Option<usize>,
    hits: Vec<Candidate>,
}

impl Collector for Range {
    #[inline]
    fn offer(&mut self, sq: f32, row: usize) {
        if sq <= self.loose_sq && Some(row) != self.exclude && libm::sqrtf(sq) < self.threshold {
            self.hits.push(Candidate { sq, row });
        }
    }

    fn finish(mut self) -> Vec<Neighbor> {
        self.hits.sort_unstable();
        if let Some(cap) = self.cap {
            self.hits.truncate(cap);
        }
        self.hits.into_iter().map(Candidate::neighbor).collect()
    }
}

/// Search options for batched queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchParams {
    pub query_block: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self { query_block: DEFAULT_QUERY_BLOCK }
    }
}

/// Exact L2 index. Row `i` belongs to `ids[i]`. Immutable after build.
#[derive(Debug, Clone)]
pub struct FlatIndex {
    dim: usize,
    data: Vec<f32>,
    ids: Vec<String>,
    positions: BTreeMap<String, usize>,
    params: SearchParams,
}

impl FlatIndex {
    /// Builds from a row-major `ids.len() × dim` matrix.
    pub fn build(data: Vec<f32>, dim: usize, ids: Vec<String>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Empty("index"));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("index dimension must be >= 1".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimensionMismatch { expected: ids.len() * dim, actual: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("index rows"));
        }
        let mut positions = BTreeMap::new();
        for (i, id) in ids.iter().enumerate() {
            if positions.insert(id.clone(), i).is_some() {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        Ok(Self { dim, data, ids, positions, params: SearchParams::default() })
    }

    pub fn from_descriptors(rows: &[Descriptor], ids: Vec<String>) -> Result<Self> {
        let dim = rows.first().map(Descriptor::dim).ok_or(Error::Empty("index"))?;
        if rows.len() != ids.len() {
            return Err(Error::DimensionMismatch { expected: ids.len(), actual: rows.len() });
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, actual: r.dim() });
            }
            data.extend_from_slice(r.values());
        }
        Self::build(data, dim, ids)
    }

    pub fn with_params(mut self, params: SearchParams) -> Self {
        self.params = SearchParams { query_block: params.query_block.max(1) };
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.positions.get(id).copied()
    }

    fn check(&self, q: &[f32]) -> Result<()> {
        if q.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, actual: q.len() });
        }
        Ok(())
    }

    /// The `min(k, len)` nearest rows, ascending.
    pub fn knn(&self, query: &[f32], k: usize) -> Result<Vec<Neighbor>> {
        Ok(self.knn_batch(&[query], k, None)?.pop().expect("one query"))
    }

    /// Rows with distance `< threshold`, ascending, truncated to `cap`.
    pub fn range_query(&self, query: &[f32], threshold: f32, cap: Option<usize>) -> Result<Vec<Neighbor>> {
        Ok(self.range_batch(&[query], threshold, cap, None)?.pop().expect("one query"))
    }

    /// Batched kNN. `exclude[i]`, when given, names one row that query `i`
    /// must not return (its own row when the query is also indexed).
    pub fn knn_batch(
        &self,
        queries: &[&[f32]],
        k: usize,
        exclude: Option<&[Option<usize>]>,
    ) -> Result<Vec<Vec<Neighbor>>> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be >= 1".into()));
        }
        let keep = k.min(self.len());
        self.scan(queries, exclude, |ex| TopK { k: keep, exclude: ex, heap: BinaryHeap::with_capacity(keep + 1) })
    }

    pub fn range_batch(
        &self,
        queries: &[&[f32]],
        threshold: f32,
        cap: Option<usize>,
        exclude: Option<&[Option<usize>]>,
    ) -> Result<Vec<Vec<Neighbor>>> {
        if threshold.is_nan() || threshold <= 0.0 {
            return Err(Error::InvalidArgument("range threshold must be > 0".into()));
        }
        if cap == Some(0) {
            return Err(Error::InvalidArgument("range cap must be >= 1".into()));
        }
        // loose prefilter in squared units; the exact test is on the root
        let loose_sq = if threshold.is_infinite() { f32::INFINITY } else { threshold * threshold * (1.0 + 1e-5) };
        self.scan(queries, exclude, |ex| Range { threshold, loose_sq, cap, exclude: ex, hits: Vec::new() })
    }

    fn scan<C, F>(&self, queries: &[&[f32]], exclude: Option<&[Option<usize>]>, make: F) -> Result<Vec<Vec<Neighbor>>>
    where
        C: Collector,
        F: Fn(Option<usize>) -> C + Sync,
    {
        for q in queries {
            self.check(q)?;
        }
        if let Some(ex) = exclude {
            if ex.len() != queries.len() {
                return Err(Error::DimensionMismatch { expected: queries.len(), actual: ex.len() });
            }
        }
        let kernel = select_tile_kernel();
        let excl = |i: usize| exclude.and_then(|e| e[i]);

        let mut out = Vec::with_capacity(queries.len());
        for (b, block) in queries.chunks(self.params.query_block).enumerate() {
            let base = b * self.params.query_block;
            let groups: Vec<(usize, &[&[f32]])> =
                block.chunks(QUERY_GROUP).enumerate().map(|(g, qs)| (base + g * QUERY_GROUP, qs)).collect();
            let run = |&(start, qs): &(usize, &[&[f32]])| -> Vec<Vec<Neighbor>> {
                let mut collectors: Vec<C> = (0..qs.len()).map(|i| make(excl(start + i))).collect();
                self.scan_group(qs, &mut collectors, kernel);
                collectors.into_iter().map(Collector::finish).collect()
            };
            #[cfg(feature = "parallel")]
            let results: Vec<Vec<Vec<Neighbor>>> = {
                use rayon::prelude::*;
                groups.par_iter().map(run).collect()
            };
            #[cfg(not(feature = "parallel"))]
            let results: Vec<Vec<Vec<Neighbor>>> = groups.iter().map(run).collect();
            out.extend(results.into_iter().flatten());
        }
        Ok(out)
    }

    fn scan_group<C: Collector>(&self, queries: &[&[f32]], collectors: &mut [C], kernel: TileKernel) {
        let n = self.len();
        let mut dists = alloc::vec![0.0f32; queries.len() * ROW_TILE];
        let mut tile_start = 0;
        while tile_start < n {
            let tile_end = (tile_start + ROW_TILE).min(n);
            let rows = tile_end - tile_start;
            let out = &mut dists[..queries.len() * rows];
            kernel(queries, &self.data[tile_start * self.dim..tile_end * self.dim], self.dim, out);
            for (c, d) in collectors.iter_mut().zip(out.chunks_exact(rows)) {
                for (i, &sq) in d.iter().enumerate() {
                    c.offer(sq, tile_start + i);
                }
            }
            tile_start = tile_end;
        }
    }
}
