//! Little-endian binary formats: feature maps (`NDFM`), descriptor matrices
//! (`NDBD` plus an `.ids` sidecar) and PCA models (`NDPC`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndbench_core::descriptors::{FeatureMap, PcaModel};
use ndbench_core::index::FlatIndex;

use crate::error::{CliError, CliResult};

const FEATURE_MAP_MAGIC: &[u8; 4] = b"NDFM";
const MATRIX_MAGIC: &[u8; 4] = b"NDBD";
const PCA_MAGIC: &[u8; 4] = b"NDPC";
const VERSION: u32 = 1;
const MATRIX_HEADER: usize = 32;
const DTYPE_F32: u8 = 0;

/// Sequential reader over a byte buffer that reports errors against a path.
struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self { path, bytes, at: 0 }
    }

    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| CliError::format(self.path, "file is truncated"))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn magic(&mut self, want: &[u8; 4]) -> CliResult<()> {
        if self.take(4)? != want {
            return Err(CliError::format(self.path, format!("bad magic, expected {}", String::from_utf8_lossy(want))));
        }
        let version = self.u32()?;
        if version != VERSION {
            return Err(CliError::format(self.path, format!("unsupported version {version}")));
        }
        Ok(())
    }

    fn u8(&mut self) -> CliResult<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize) -> CliResult<Vec<f32>> {
        let len = n.checked_mul(4).ok_or_else(|| CliError::format(self.path, "size overflow"))?;
        Ok(self.take(len)?.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect())
    }

    fn f64s(&mut self, n: usize) -> CliResult<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }

    fn finish(&self) -> CliResult<()> {
        if self.at != self.bytes.len() {
            return Err(CliError::format(self.path, format!("{} trailing bytes", self.bytes.len() - self.at)));
        }
        Ok(())
    }
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

fn dim_u32(path: &Path, v: usize, what: &str) -> CliResult<u32> {
    u32::try_from(v).map_err(|_| CliError::format(path, format!("{what} {v} does not fit in u32")))
}

pub fn write_feature_map(path: &Path, map: &FeatureMap) -> CliResult<()> {
    let mut out = Vec::with_capacity(20 + map.data().len() * 4);
    out.extend_from_slice(FEATURE_MAP_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [map.height(), map.width(), map.channels()] {
        out.extend_from_slice(&dim_u32(path, v, "extent")?.to_le_bytes());
    }
    for v in map.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path, &out)
}

/// Reads a feature map. Values must be nonnegative unless `signed`.
pub fn read_feature_map(path: &Path, signed: bool) -> CliResult<FeatureMap> {
    let bytes = read_bytes(path)?;
    let mut c = Cursor::new(path, &bytes);
    c.magic(FEATURE_MAP_MAGIC)?;
    let (h, w, ch) = (c.u32()? as usize, c.u32()? as usize, c.u32()? as usize);
    let data = c.f32s(h * w * ch)?;
    c.finish()?;
    let map = if signed { FeatureMap::new_signed(h, w, ch, data) } else { FeatureMap::new(h, w, ch, data) };
    map.map_err(|e| CliError::format(path, e.to_string()))
}

/// Row-major `f32` descriptors with one id per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorMatrix {
    pub ids: Vec<String>,
    pub dim: usize,
    pub data: Vec<f32>,
}

impl DescriptorMatrix {
    pub fn new(ids: Vec<String>, dim: usize, data: Vec<f32>) -> CliResult<Self> {
        if data.len() != ids.len() * dim {
            return Err(CliError::Input(format!(
                "descriptor matrix has {} values for {} rows of dim {dim}",
                data.len(),
                ids.len()
            )));
        }
        Ok(Self { ids, dim, data })
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

    pub fn into_index(self) -> CliResult<FlatIndex> {
        Ok(FlatIndex::build(self.data, self.dim, self.ids)?)
    }
}

/// Sidecar id file: `X.ndbd` → `X.ids`.
pub fn ids_path(matrix: &Path) -> PathBuf {
    matrix.with_extension("ids")
}

pub fn write_matrix(path: &Path, m: &DescriptorMatrix) -> CliResult<()> {
    let mut out = Vec::with_capacity(MATRIX_HEADER + m.data.len() * 4);
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m.len() as u64).to_le_bytes());
    out.extend_from_slice(&dim_u32(path, m.dim, "dimension")?.to_le_bytes());
    out.push(DTYPE_F32);
    out.resize(MATRIX_HEADER, 0);
    for v in &m.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path, &out)?;

    let mut ids = String::new();
    for id in &m.ids {
        if id.contains('\n') {
            return Err(CliError::Input(format!("id {id:?} contains a newline")));
        }
        ids.push_str(id);
        ids.push('\n');
    }
    write_bytes(&ids_path(path), ids.as_bytes())
}

pub fn read_matrix(path: &Path) -> CliResult<DescriptorMatrix> {
    let bytes = read_bytes(path)?;
    let mut c = Cursor::new(path, &bytes);
    c.magic(MATRIX_MAGIC)?;
    let count = usize::try_from(c.u64()?).map_err(|_| CliError::format(path, "row count too large"))?;
    let dim = c.u32()? as usize;
    let dtype = c.u8()?;
    if dtype != DTYPE_F32 {
        return Err(CliError::format(path, format!("unsupported dtype {dtype}")));
    }
    c.take(MATRIX_HEADER - c.at)?;
    let data = c.f32s(count * dim)?;
    c.finish()?;

    let ids_file = ids_path(path);
    let text = fs::read_to_string(&ids_file).map_err(|e| CliError::io(&ids_file, e))?;
    let ids: Vec<String> = text.lines().map(str::to_string).collect();
    if ids.len() != count {
        return Err(CliError::format(&ids_file, format!("{} ids for {count} descriptor rows", ids.len())));
    }
    DescriptorMatrix::new(ids, dim, data)
}

pub fn write_pca(path: &Path, pca: &PcaModel) -> CliResult<()> {
    let mut out = Vec::new();
    out.extend_from_slice(PCA_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&dim_u32(path, pca.dim(), "dimension")?.to_le_bytes());
    out.extend_from_slice(&pca.epsilon().to_le_bytes());
    for v in pca.mean().iter().chain(pca.eigenvalues()).chain(pca.components()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    write_bytes(path, &out)
}

pub fn read_pca(path: &Path) -> CliResult<PcaModel> {
    let bytes = read_bytes(path)?;
    let mut c = Cursor::new(path, &bytes);
    c.magic(PCA_MAGIC)?;
    let d = c.u32()? as usize;
    let epsilon = c.f64()?;
    let mean = c.f64s(d)?;
    let eigenvalues = c.f64s(d)?;
    let components = c.f64s(d * d)?;
    c.finish()?;
    PcaModel::from_parts(mean, components, eigenvalues, epsilon).map_err(|e| CliError::format(path, e.to_string()))
}
