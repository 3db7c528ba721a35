use std::collections::BTreeSet;
use std::path::Path;

use ndbench_core::dataset::{content_hash, hash_to_hex};
use ndbench_core::descriptors::{gist_extract, BlockPooling, GistConfig};
use rayon::prelude::*;

use super::{input_error, known_keys, warn_unknown};
use crate::binary::{read_bytes, write_matrix, DescriptorMatrix};
use crate::error::CliResult;
use crate::image_input::decode_gray;
use crate::params::Params;
use crate::run::Run;
use crate::tables::read_image_manifest;

pub const KEYS: &[&str] = &["manifest", "out", "blocks", "image_side", "scales", "orientations", "pooling"];

fn gist_config(params: &Params) -> CliResult<GistConfig> {
    let d = GistConfig::default();
    let pooling = match params.get("pooling").unwrap_or("mean") {
        "mean" => BlockPooling::Mean,
        "energy" => BlockPooling::Energy,
        other => return Err(input_error(format!("unknown GIST pooling {other:?} (mean|energy)"))),
    };
    Ok(GistConfig {
        image_side: params.parse_or("image_side", d.image_side)?,
        scales: params.parse_or("scales", d.scales)?,
        orientations_per_scale: params.parse_or("orientations", d.orientations_per_scale)?,
        blocks: params.parse_or("blocks", d.blocks)?,
        pooling,
    })
}

/// GIST descriptors for every readable image of a manifest. Unreadable,
/// undecodable or hash-mismatched images are skipped with a warning.
pub fn cmd_gist(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let manifest = params.require_path("manifest")?;
    let out = params.require_path("out")?;
    let cfg = gist_config(params)?;
    let side = u32::try_from(cfg.image_side).map_err(|_| input_error("image_side too large"))?;

    let mut run = Run::new("gist", params);
    let records = read_image_manifest(&manifest)?;
    run.input(&manifest)?;
    if records.is_empty() {
        return Err(input_error(format!("{}: manifest lists no images", manifest.display())));
    }
    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert(r.id.as_str()) {
            return Err(input_error(format!("{}: duplicate image id {}", manifest.display(), r.id)));
        }
    }

    let base = manifest.parent().unwrap_or(Path::new("."));
    let loaded: Vec<(String, std::path::PathBuf, Option<Vec<u8>>)> = records
        .iter()
        .map(|r| {
            let path = base.join(&r.path);
            match read_bytes(&path) {
                Ok(bytes) => {
                    let expected = r.content_hash;
                    if expected != [0u8; 16] && content_hash(&bytes) != expected {
                        log::warn!(
                            "skipping {}: content hash {} differs from manifest {}",
                            path.display(),
                            hash_to_hex(&content_hash(&bytes)),
                            hash_to_hex(&expected)
                        );
                        (r.id.clone(), path, None)
                    } else {
                        (r.id.clone(), path, Some(bytes))
                    }
                }
                Err(e) => {
                    log::warn!("skipping {e}");
                    (r.id.clone(), path, None)
                }
            }
        })
        .collect();

    let extracted: Vec<Option<Vec<f32>>> = loaded
        .par_iter()
        .map(|(_, path, bytes)| {
            let bytes = bytes.as_ref()?;
            match decode_gray(bytes, side).and_then(|img| gist_extract(&img, &cfg).map_err(|e| e.to_string())) {
                Ok(d) => Some(d.into_values()),
                Err(e) => {
                    log::warn!("skipping {}: {e}", path.display());
                    None
                }
            }
        })
        .collect();

    let mut ids = Vec::new();
    let mut data = Vec::new();
    for ((id, path, bytes), desc) in loaded.iter().zip(extracted) {
        if let (Some(bytes), Some(desc)) = (bytes, desc) {
            run.input_bytes(path, bytes);
            ids.push(id.clone());
            data.extend(desc);
        }
    }
    if ids.is_empty() {
        return Err(input_error(format!("{}: no readable images", manifest.display())));
    }
    let skipped = records.len() - ids.len();
    if skipped > 0 {
        log::warn!("{skipped} of {} images skipped", records.len());
    }
    write_matrix(&out, &DescriptorMatrix::new(ids, cfg.dim(), data)?)?;
    run.output(&out);
    run.finish()?;
    Ok(run)
}
