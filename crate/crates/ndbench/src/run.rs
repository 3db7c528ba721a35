//! Run manifests: every output file gets a `<file>.manifest.json` naming the
//! command, its settings, the digests of its inputs and the tool version.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndbench_core::dataset::{content_hash, hash_to_hex};
use serde::{Deserialize, Serialize};

use crate::binary::read_bytes;
use crate::error::CliResult;
use crate::params::Params;
use crate::tables::write_json;

pub const TOOL_VERSION: &str = concat!("ndbench ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub output: String,
    pub config: BTreeMap<String, String>,
    /// Input path → MD5 of its bytes.
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
}

/// Inputs and outputs of one command invocation.
#[derive(Debug)]
pub struct Run {
    command: String,
    config: BTreeMap<String, String>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<PathBuf>,
}

impl Run {
    pub fn new(command: &str, params: &Params) -> Self {
        Self { command: command.into(), config: params.snapshot(), inputs: BTreeMap::new(), outputs: Vec::new() }
    }

    /// Records an input file and its digest.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        if let Entry::Vacant(slot) = self.inputs.entry(path.display().to_string()) {
            slot.insert(hash_to_hex(&content_hash(&read_bytes(path)?)));
        }
        Ok(())
    }

    /// Records input bytes already in memory.
    pub fn input_bytes(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.insert(path.display().to_string(), hash_to_hex(&content_hash(bytes)));
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn outputs(&self) -> &[PathBuf] {
        &self.outputs
    }

    /// Writes one manifest per recorded output.
    pub fn finish(&self) -> CliResult<()> {
        for out in &self.outputs {
            let m = RunManifest {
                command: self.command.clone(),
                output: out.display().to_string(),
                config: self.config.clone(),
                inputs: self.inputs.clone(),
                tool_version: TOOL_VERSION.into(),
            };
            write_json(&manifest_path(out), &m)?;
        }
        Ok(())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}
