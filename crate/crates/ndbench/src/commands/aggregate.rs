use std::fs;

use ndbench_core::descriptors::{pca_whiten, rmac_aggregate, spoc_aggregate, Descriptor, RmacConfig};

use super::{input_error, known_keys, warn_unknown};
use crate::binary::{read_feature_map, read_pca, write_matrix, DescriptorMatrix};
use crate::error::{CliError, CliResult};
use crate::params::Params;
use crate::run::Run;

pub const KEYS: &[&str] = &["maps", "method", "pca", "max_scale", "overlap", "signed", "out"];

/// Aggregates every `*.ndfm` feature map of a directory into one descriptor
/// row, ids taken from the file stems (sorted).
///
/// `spoc` sum-pools, then whitens with the PCA model if one is given, else
/// only L2-normalizes. `rmac` requires the model.
pub fn cmd_aggregate(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let dir = params.require_path("maps")?;
    let out = params.require_path("out")?;
    let method = params.require("method")?.to_ascii_lowercase();
    let signed = params.bool_or("signed", false)?;
    let d = RmacConfig::default();
    let rmac = RmacConfig {
        max_scale: params.parse_or("max_scale", d.max_scale)?,
        overlap_target: params.parse_or("overlap", d.overlap_target)?,
    };

    let mut run = Run::new("aggregate", params);
    let pca = match params.path("pca") {
        Some(p) => {
            let m = read_pca(&p)?;
            run.input(&p)?;
            Some(m)
        }
        None => None,
    };
    if method == "rmac" && pca.is_none() {
        return Err(input_error("rmac aggregation requires a PCA model (`pca`)"));
    }
    if method != "rmac" && method != "spoc" {
        return Err(input_error(format!("unknown aggregation method {method:?} (spoc|rmac)")));
    }

    let mut files: Vec<_> = fs::read_dir(&dir)
        .map_err(|e| CliError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "ndfm"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(input_error(format!("{}: no .ndfm files", dir.display())));
    }

    let mut ids = Vec::with_capacity(files.len());
    let mut data = Vec::new();
    let mut dim = None;
    for f in &files {
        let map = read_feature_map(f, signed)?;
        run.input(f)?;
        let desc: Descriptor = match (&*method, &pca) {
            ("rmac", Some(pca)) => rmac_aggregate(&map, &rmac, pca)?,
            (_, Some(pca)) => pca_whiten(&spoc_aggregate(&map)?, pca)?,
            _ => Descriptor::normalized(spoc_aggregate(&map)?.values())?,
        };
        if *dim.get_or_insert(desc.dim()) != desc.dim() {
            return Err(CliError::format(f, format!("{} channels, expected {}", desc.dim(), dim.unwrap())));
        }
        ids.push(f.file_stem().unwrap_or_default().to_string_lossy().into_owned());
        data.extend_from_slice(desc.values());
    }
    write_matrix(&out, &DescriptorMatrix::new(ids, dim.unwrap_or(0), data)?)?;
    run.output(&out);
    run.finish()?;
    Ok(run)
}
