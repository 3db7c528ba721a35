//! Fixed-length image descriptors.
//!
//! GIST is extracted natively from grayscale rasters. SPoC and R-MAC
//! aggregate convolutional feature maps computed by an external network.
//! PCA whitening and L2 normalization are shared post-processing steps.

mod fft;
mod gist;
mod pca;
mod pooling;

pub use gist::{gabor_responses, gist_extract, BlockPooling, GistConfig, Raster};
pub use pca::{pca_train, pca_whiten, PcaModel, DEFAULT_EPSILON};
pub use pooling::{max_pool_region, rmac_aggregate, rmac_regions, spoc_aggregate, Region, RmacConfig};

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Tolerance on the Euclidean norm of a normalized descriptor.
pub const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// A descriptor vector. `normalized` descriptors have unit Euclidean norm.
///
/// A zero vector that could not be normalized is kept as a sentinel with
/// `normalized == false`.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor {
    values: Vec<f32>,
    normalized: bool,
}

impl Descriptor {
    /// Raw (unnormalized) descriptor. Rejects non-finite entries.
    pub fn new(values: Vec<f32>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("descriptor"));
        }
        Ok(Self { values, normalized: false })
    }

    /// L2-normalized copy of `values`, or the zero-vector sentinel.
    pub fn normalized(values: &[f32]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("descriptor"));
        }
        Ok(l2_normalize(values.iter().map(|&v| v as f64)))
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f32> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|&v| v as f64 * v as f64).sum())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Normalizes a vector accumulated in f64. A zero vector yields the sentinel.
pub(crate) fn l2_normalize<I>(values: I) -> Descriptor
where
    I: IntoIterator<Item = f64>,
{
    let values: Vec<f64> = values.into_iter().collect();
    let norm = libm::sqrt(values.iter().map(|v| v * v).sum());
    if norm == 0.0 || !norm.is_finite() {
        return Descriptor { values: values.iter().map(|_| 0.0).collect(), normalized: false };
    }
    Descriptor { values: values.iter().map(|v| (v / norm) as f32).collect(), normalized: true }
}

/// A convolutional feature map in H×W×C order (channels fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<f32>,
}

impl FeatureMap {
    /// Builds a map of post-activation (nonnegative) values.
    pub fn new(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        let map = Self::new_signed(height, width, channels, data)?;
        if map.data.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidArgument("post-activation feature map has negative entries".into()));
        }
        Ok(map)
    }

    /// Builds a map without the nonnegativity check (pre-activation features).
    pub fn new_signed(height: usize, width: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Empty("feature map"));
        }
        let expected = height * width * channels;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature map"));
        }
        Ok(Self { height, width, channels, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn at(&self, h: usize, w: usize, c: usize) -> f32 {
        self.data[(h * self.width + w) * self.channels + c]
    }

    /// All channels at one spatial position.
    pub fn fiber(&self, h: usize, w: usize) -> &[f32] {
        let start = (h * self.width + w) * self.channels;
        &self.data[start..start + self.channels]
    }
}

fn squared_distance_f64(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum()
}

/// Ranking triplet loss `½·max(0, m + ‖q−d₊‖² − ‖q−d₋‖²)`.
pub fn triplet_loss(q: &Descriptor, d_plus: &Descriptor, d_minus: &Descriptor, margin: f64) -> Result<f64> {
    for d in [d_plus, d_minus] {
        if d.dim() != q.dim() {
            return Err(Error::DimensionMismatch { expected: q.dim(), actual: d.dim() });
        }
    }
    if !margin.is_finite() || margin < 0.0 {
        return Err(Error::InvalidArgument("triplet margin must be finite and >= 0".into()));
    }
    let pos = squared_distance_f64(q.values(), d_plus.values());
    let neg = squared_distance_f64(q.values(), d_minus.values());
    Ok(0.5 * (margin + pos - neg).max(0.0))
}
