//! PNG/JPEG decoding to the square grayscale rasters GIST expects.

use image::imageops::FilterType;
use ndbench_core::descriptors::Raster;

/// Decodes an image, converts it to 8-bit luma and resizes it to
/// `side × side` (aspect ratio is not preserved). Values are 0–255.
pub fn decode_gray(bytes: &[u8], side: u32) -> Result<Raster, String> {
    let img = image::load_from_memory(bytes).map_err(|e| e.to_string())?;
    let luma = img.to_luma8();
    let luma = if luma.width() == side && luma.height() == side {
        luma
    } else {
        image::imageops::resize(&luma, side, side, FilterType::Triangle)
    };
    let data = luma.into_raw().into_iter().map(f32::from).collect();
    Raster::gray(side as usize, data).map_err(|e| e.to_string())
}
