//! GIST: block-pooled magnitudes of a multi-scale, multi-orientation Gabor
//! filter bank applied in the frequency domain.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use super::fft::{fft2, Complex, Fft};
use super::Descriptor;
use crate::error::{Error, Result};

/// A raster image, row-major, channels interleaved.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl Raster {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::Empty("raster"));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("raster"));
        }
        Ok(Self { width, height, channels, data })
    }

    pub fn gray(side: usize, data: Vec<f32>) -> Result<Self> {
        Self::new(side, side, 1, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }
}

/// Block pooling statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockPooling {
    /// Mean response magnitude per block.
    #[default]
    Mean,
    /// Mean squared magnitude (energy) per block.
    Energy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GistConfig {
    pub image_side: usize,
    pub scales: usize,
    pub orientations_per_scale: usize,
    /// Side `N` of the `N × N` pooling grid.
    pub blocks: usize,
    pub pooling: BlockPooling,
}

impl Default for GistConfig {
    fn default() -> Self {
        Self { image_side: 512, scales: 4, orientations_per_scale: 8, blocks: 4, pooling: BlockPooling::Mean }
    }
}

impl GistConfig {
    pub fn filters(&self) -> usize {
        self.scales * self.orientations_per_scale
    }

    /// `blocks² × scales × orientations_per_scale`.
    ///
    /// Eight blocks give 2048 values, not the 512 sometimes quoted for an
    /// 8-block GIST.
    pub fn dim(&self) -> usize {
        self.blocks * self.blocks * self.filters()
    }

    fn validate(&self) -> Result<()> {
        if self.scales == 0 || self.orientations_per_scale == 0 || self.blocks == 0 {
            return Err(Error::InvalidArgument("GIST scales, orientations and blocks must be >= 1".into()));
        }
        if self.blocks > self.image_side {
            return Err(Error::InvalidArgument("more GIST blocks than pixels".into()));
        }
        Ok(())
    }
}

/// Signed frequency of FFT bin `k` for length `n`.
fn bin_frequency(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Transfer function of one Gabor filter on an `n × n` frequency grid
/// (unshifted FFT layout). Zero at DC.
///
/// Scale `s` with `o` orientations is centered at radial frequency
/// `0.3/1.85^s` cycles/pixel with angular bandwidth set by `16·o²/32²`,
/// following the Oliva–Torralba bank.
fn gabor_transfer(n: usize, scale: usize, orientation: usize, orientations: usize) -> Vec<f64> {
    let radial_width = 0.35;
    let center = 0.3 / libm::pow(1.85, scale as f64);
    let angular = 16.0 * (orientations * orientations) as f64 / (32.0 * 32.0);
    let angle = PI / orientations as f64 * orientation as f64;

    let mut g = vec![0.0; n * n];
    for ky in 0..n {
        let fy = bin_frequency(ky, n);
        for kx in 0..n {
            if kx == 0 && ky == 0 {
                continue;
            }
            let fx = bin_frequency(kx, n);
            let fr = libm::sqrt(fx * fx + fy * fy);
            let mut tr = libm::atan2(fy, fx) + angle;
            if tr < -PI {
                tr += 2.0 * PI;
            } else if tr > PI {
                tr -= 2.0 * PI;
            }
            let radial = fr / n as f64 / center - 1.0;
            g[ky * n + kx] = libm::exp(-10.0 * radial_width * radial * radial - 2.0 * angular * PI * tr * tr);
        }
    }
    g
}

fn check_raster(image: &Raster, cfg: &GistConfig) -> Result<()> {
    cfg.validate()?;
    if image.channels != 1 || image.width != image.height {
        return Err(Error::BadRaster { width: image.width, height: image.height, channels: image.channels });
    }
    if image.width != cfg.image_side {
        return Err(Error::InvalidArgument(alloc::format!(
            "image side {} differs from configured side {}",
            image.width,
            cfg.image_side
        )));
    }
    Ok(())
}

/// Magnitude of every filter response, one row-major `side × side` map per
/// filter, ordered scale-major then orientation.
pub fn gabor_responses(image: &Raster, cfg: &GistConfig) -> Result<Vec<Vec<f64>>> {
    check_raster(image, cfg)?;
    let n = cfg.image_side;
    let fft = Fft::new(n);
    let mut spectrum: Vec<Complex> = image.data.iter().map(|&v| Complex::new(v as f64, 0.0)).collect();
    fft2(&mut spectrum, &fft, false);

    let mut out = Vec::with_capacity(cfg.filters());
    let mut work = vec![Complex::ZERO; n * n];
    for s in 0..cfg.scales {
        for o in 0..cfg.orientations_per_scale {
            let g = gabor_transfer(n, s, o, cfg.orientations_per_scale);
            for ((w, &x), &gv) in work.iter_mut().zip(&spectrum).zip(&g) {
                *w = x.scale(gv);
            }
            fft2(&mut work, &fft, true);
            out.push(work.iter().map(|c| c.abs()).collect());
        }
    }
    Ok(out)
}

/// Block boundaries `⌊i·n/N⌋` for `i = 0..=N`.
fn block_edges(n: usize, blocks: usize) -> Vec<usize> {
    (0..=blocks).map(|i| i * n / blocks).collect()
}

/// GIST descriptor of a square grayscale raster.
///
/// Layout: filter-major; within a filter, blocks in row-major order.
pub fn gist_extract(image: &Raster, cfg: &GistConfig) -> Result<Descriptor> {
    let responses = gabor_responses(image, cfg)?;
    let n = cfg.image_side;
    let edges = block_edges(n, cfg.blocks);
    let mut out = Vec::with_capacity(cfg.dim());
    for resp in &responses {
        for by in 0..cfg.blocks {
            for bx in 0..cfg.blocks {
                let mut acc = 0.0f64;
                for y in edges[by]..edges[by + 1] {
                    let row = &resp[y * n..(y + 1) * n];
                    for &v in &row[edges[bx]..edges[bx + 1]] {
                        acc += match cfg.pooling {
                            BlockPooling::Mean => v,
                            BlockPooling::Energy => v * v,
                        };
                    }
                }
                let cells = (edges[by + 1] - edges[by]) * (edges[bx + 1] - edges[bx]);
                out.push((acc / cells as f64) as f32);
            }
        }
    }
    Descriptor::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(blocks: usize) -> GistConfig {
        GistConfig { image_side: 32, blocks, ..Default::default() }
    }

    #[test]
    fn dims() {
        assert_eq!(GistConfig::default().dim(), 512);
        assert_eq!(GistConfig { blocks: 8, ..Default::default() }.dim(), 2048);
    }

    #[test]
    fn zero_image_zero_descriptor() {
        let img = Raster::gray(32, vec![0.0; 32 * 32]).unwrap();
        let d = gist_extract(&img, &small(4)).unwrap();
        assert_eq!(d.dim(), 512);
        assert!(d.is_zero());
    }

    #[test]
    fn constant_image_is_removed_with_dc() {
        let img = Raster::gray(32, vec![7.0; 32 * 32]).unwrap();
        let d = gist_extract(&img, &small(2)).unwrap();
        assert!(d.values().iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn filters_zero_at_dc() {
        for s in 0..4 {
            for o in 0..8 {
                assert_eq!(gabor_transfer(16, s, o, 8)[0], 0.0);
            }
        }
    }

    #[test]
    fn rejects_bad_rasters() {
        let rgb = Raster::new(32, 32, 3, vec![0.0; 32 * 32 * 3]).unwrap();
        assert!(matches!(gist_extract(&rgb, &small(4)), Err(Error::BadRaster { .. })));
        let wide = Raster::new(32, 16, 1, vec![0.0; 32 * 16]).unwrap();
        assert!(matches!(gist_extract(&wide, &small(4)), Err(Error::BadRaster { .. })));
        let other = Raster::gray(16, vec![0.0; 256]).unwrap();
        assert!(gist_extract(&other, &small(4)).is_err());
    }

    #[test]
    fn energy_pooling_differs() {
        let mut data = vec![0.0; 32 * 32];
        data[16 * 32 + 16] = 255.0;
        let img = Raster::gray(32, data).unwrap();
        let mean = gist_extract(&img, &small(4)).unwrap();
        let energy = gist_extract(&img, &GistConfig { pooling: BlockPooling::Energy, ..small(4) }).unwrap();
        assert_ne!(mean, energy);
    }

    #[test]
    fn non_power_of_two_side() {
        let data: Vec<f32> = (0..24 * 24).map(|i| ((i * 31) % 17) as f32).collect();
        let img = Raster::gray(24, data).unwrap();
        let cfg = GistConfig { image_side: 24, blocks: 4, ..Default::default() };
        let d = gist_extract(&img, &cfg).unwrap();
        assert_eq!(d.dim(), 512);
        assert!(d.values().iter().any(|&v| v > 0.0));
    }
}
