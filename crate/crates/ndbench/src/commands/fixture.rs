use std::path::Path;

use ndbench_core::dataset::{build_clusters, ClusterKind, NdPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{input_error, known_keys, warn_unknown};
use crate::binary::{write_bytes, write_matrix, DescriptorMatrix};
use crate::error::CliResult;
use crate::params::Params;
use crate::run::Run;
use crate::tables::{write_clusters, write_id_list, write_pairs};

pub const KEYS: &[&str] =
    &["out", "dim", "n_pool", "n_queries", "n_clusters", "ind_noise", "nind_noise", "total_pairs"];

/// Synthetic desk-scale dataset: unit-norm Gaussian pool and query
/// descriptors plus ND clusters of 2–4 perturbed copies of a random base.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureConfig {
    pub seed: u64,
    pub dim: usize,
    pub n_pool: usize,
    pub n_queries: usize,
    pub n_clusters: usize,
    /// Perturbation norm of IND (identical) copies.
    pub ind_noise: f64,
    /// Perturbation norm of NIND (non-identical) copies.
    pub nind_noise: f64,
    /// `total_pairs` written to the generated pipeline config.
    pub total_pairs: usize,
}

impl Default for FixtureConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            dim: 32,
            n_pool: 2000,
            n_queries: 100,
            n_clusters: 40,
            ind_noise: 0.05,
            nind_noise: 0.8,
            total_pairs: 1000,
        }
    }
}

impl FixtureConfig {
    pub fn from_params(params: &Params) -> CliResult<Self> {
        let d = Self::default();
        let cfg = Self {
            seed: params.parse_or("seed", d.seed)?,
            dim: params.parse_or("dim", d.dim)?,
            n_pool: params.parse_or("n_pool", d.n_pool)?,
            n_queries: params.parse_or("n_queries", d.n_queries)?,
            n_clusters: params.parse_or("n_clusters", d.n_clusters)?,
            ind_noise: params.parse_or("ind_noise", d.ind_noise)?,
            nind_noise: params.parse_or("nind_noise", d.nind_noise)?,
            total_pairs: params.parse_or("total_pairs", d.total_pairs)?,
        };
        if cfg.dim == 0 || cfg.n_pool < 2 || cfg.n_queries == 0 || cfg.n_clusters == 0 {
            return Err(input_error("fixture needs dim, n_queries, n_clusters >= 1 and n_pool >= 2"));
        }
        Ok(cfg)
    }
}

fn unit(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn gaussian_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    unit(&mut v);
    v
}

/// `base` plus a random perturbation of norm `noise`, renormalized.
fn perturbed(rng: &mut ChaCha8Rng, base: &[f64], noise: f64) -> Vec<f64> {
    let dir = gaussian_unit(rng, base.len());
    let mut v: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + noise * d).collect();
    unit(&mut v);
    v
}

/// Writes the fixture to `out`: `descriptors.ndbd` (+ `.ids`), `pairs.csv`,
/// `clusters.json`, `queries.txt`, `pool.txt` and a ready-to-run
/// `pipeline.conf`.
pub fn write_fixture(out: &Path, cfg: &FixtureConfig, run: &mut Run) -> CliResult<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();

    let pool: Vec<String> = (0..cfg.n_pool).map(|i| format!("p{i:06}")).collect();
    for id in &pool {
        ids.push(id.clone());
        rows.push(gaussian_unit(&mut rng, cfg.dim));
    }
    let queries: Vec<String> = (0..cfg.n_queries).map(|i| format!("q{i:06}")).collect();
    for id in &queries {
        ids.push(id.clone());
        rows.push(gaussian_unit(&mut rng, cfg.dim));
    }

    let mut pairs = Vec::new();
    for c in 0..cfg.n_clusters {
        let kind = if rng.random_bool(0.5) { ClusterKind::Ind } else { ClusterKind::Nind };
        let noise = match kind {
            ClusterKind::Ind => cfg.ind_noise,
            ClusterKind::Nind => cfg.nind_noise,
        };
        let base = gaussian_unit(&mut rng, cfg.dim);
        let size = rng.random_range(2..=4usize);
        let members: Vec<String> = (0..size).map(|j| format!("c{c:04}_{j}")).collect();
        for m in &members {
            ids.push(m.clone());
            rows.push(perturbed(&mut rng, &base, noise));
        }
        for w in members.windows(2) {
            pairs.push(NdPair::new(w[0].as_str(), w[1].as_str(), kind.label())?);
        }
    }
    let clusters = build_clusters(&pairs)?;

    let data: Vec<f32> = rows.iter().flatten().map(|&x| x as f32).collect();
    let desc = out.join("descriptors.ndbd");
    write_matrix(&desc, &DescriptorMatrix::new(ids, cfg.dim, data)?)?;
    run.output(&desc);
    let pairs_path = out.join("pairs.csv");
    write_pairs(&pairs_path, &pairs)?;
    run.output(&pairs_path);
    let clusters_path = out.join("clusters.json");
    write_clusters(&clusters_path, &clusters)?;
    run.output(&clusters_path);
    for (name, list) in [("queries.txt", &queries), ("pool.txt", &pool)] {
        let path = out.join(name);
        write_id_list(&path, list)?;
        run.output(&path);
    }

    let conf = format!(
        "# synthetic fixture, seed {}\n\
         descriptors = descriptors.ndbd\n\
         pairs = pairs.csv\n\
         queries = queries.txt\n\
         pool = pool.txt\n\
         strategy = hn2\n\
         total_pairs = {}\n\
         fp_rates = 0.01,0.1\n\
         caps = none,1,10\n\
         out_dir = out\n",
        cfg.seed, cfg.total_pairs
    );
    let conf_path = out.join("pipeline.conf");
    write_bytes(&conf_path, conf.as_bytes())?;
    run.output(&conf_path);
    Ok(())
}

pub fn cmd_fixture(params: &Params) -> CliResult<Run> {
    warn_unknown(params, &known_keys(KEYS));
    let out = params.require_path("out")?;
    let cfg = FixtureConfig::from_params(params)?;
    let mut run = Run::new("fixture", params);
    write_fixture(&out, &cfg, &mut run)?;
    run.finish()?;
    Ok(run)
}
