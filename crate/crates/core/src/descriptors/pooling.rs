//! Spatial aggregation of convolutional feature maps (SPoC and R-MAC).

use alloc::vec;
use alloc::vec::Vec;

use super::{l2_normalize, pca_whiten, Descriptor, FeatureMap, PcaModel};
use crate::error::{Error, Result};

/// Sum pooling: `out[c] = Σ_{h,w} map[h, w, c]`. The result is neither
/// whitened nor normalized.
pub fn spoc_aggregate(map: &FeatureMap) -> Result<Descriptor> {
    let c = map.channels();
    let mut acc = vec![0.0f64; c];
    for fiber in map.data().chunks_exact(c) {
        for (a, &v) in acc.iter_mut().zip(fiber) {
            *a += v as f64;
        }
    }
    Descriptor::new(acc.into_iter().map(|v| v as f32).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmacConfig {
    /// Finest scale `L`; scales `1..=L` are used.
    pub max_scale: usize,
    /// Target overlap between consecutive regions.
    pub overlap_target: f64,
}

impl Default for RmacConfig {
    fn default() -> Self {
        Self { max_scale: 2, overlap_target: 0.4 }
    }
}

/// A square region of a feature map: top-left corner and side, in cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub x: usize,
    pub y: usize,
    pub side: usize,
}

/// Region grid of the R-MAC construction.
///
/// At scale `l` regions are squares of side `⌊2·min(H,W)/(l+1)⌋`, placed on a
/// uniform grid. Along the longer axis the number of extra regions is chosen
/// so that consecutive regions overlap as close to `overlap_target` as
/// possible (candidates 1..=6).
pub fn rmac_regions(height: usize, width: usize, cfg: &RmacConfig) -> Result<Vec<Region>> {
    if cfg.max_scale == 0 {
        return Err(Error::InvalidArgument("R-MAC max_scale must be >= 1".into()));
    }
    if height == 0 || width == 0 {
        return Err(Error::Empty("feature map"));
    }
    let (h, w) = (height as f64, width as f64);
    let short = h.min(w);
    let long = h.max(w);

    let mut best = 0usize;
    let mut best_err = f64::INFINITY;
    for (i, steps) in (2..=7).enumerate() {
        let b = (long - short) / (steps as f64 - 1.0);
        let err = libm::fabs((short * short - short * b) / (short * short) - cfg.overlap_target);
        if err < best_err {
            best_err = err;
            best = i;
        }
    }
    let (extra_w, extra_h) = match height.cmp(&width) {
        core::cmp::Ordering::Less => (best + 1, 0),
        core::cmp::Ordering::Greater => (0, best + 1),
        core::cmp::Ordering::Equal => (0, 0),
    };

    let mut regions = Vec::new();
    for l in 1..=cfg.max_scale {
        let side = libm::floor(2.0 * short / (l as f64 + 1.0));
        if side < 1.0 {
            return Err(Error::DegenerateRegion { scale: l, side: side as usize });
        }
        let half = libm::floor(side / 2.0 - 1.0);
        let starts = |extent: f64, extra: usize| -> Vec<usize> {
            let count = l + extra;
            let step = if count > 1 { (extent - side) / (count as f64 - 1.0) } else { 0.0 };
            (0..count).map(|i| (libm::floor(half + i as f64 * step) - half) as usize).collect()
        };
        let xs = starts(w, extra_w);
        let ys = starts(h, extra_h);
        let side = side as usize;
        for &y in &ys {
            for &x in &xs {
                debug_assert!(x + side <= width && y + side <= height);
                regions.push(Region { x, y, side });
            }
        }
    }
    Ok(regions)
}

/// Channelwise maximum over a region.
pub fn max_pool_region(map: &FeatureMap, region: &Region) -> Vec<f32> {
    let mut out = vec![f32::NEG_INFINITY; map.channels()];
    for h in region.y..region.y + region.side {
        for w in region.x..region.x + region.side {
            for (o, &v) in out.iter_mut().zip(map.fiber(h, w)) {
                if v > *o {
                    *o = v;
                }
            }
        }
    }
    out
}

/// R-MAC: per region max-pool, whiten and normalize; sum; normalize again.
pub fn rmac_aggregate(map: &FeatureMap, cfg: &RmacConfig, pca: &PcaModel) -> Result<Descriptor> {
    if pca.dim() != map.channels() {
        return Err(Error::DimensionMismatch { expected: map.channels(), actual: pca.dim() });
    }
    let regions = rmac_regions(map.height(), map.width(), cfg)?;
    let mut acc = vec![0.0f64; map.channels()];
    for r in &regions {
        let pooled = Descriptor::new(max_pool_region(map, r))?;
        let v = pca_whiten(&pooled, pca)?;
        for (a, &x) in acc.iter_mut().zip(v.values()) {
            *a += x as f64;
        }
    }
    Ok(l2_normalize(acc))
}
