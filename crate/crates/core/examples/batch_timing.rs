//! Times a 1000-query exact k-NN batch over 100,000 × 512 rows.

use std::time::Instant;

use ndbench_core::index::FlatIndex;
use rand::{Rng, SeedableRng};

fn main() {
    let (n, dim, nq) = (100_000, 512, 1_000);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let data: Vec<f32> = (0..n * dim).map(|_| r.random()).collect();
    let ids = (0..n).map(|i| format!("r{i}")).collect();
    let idx = FlatIndex::build(data, dim, ids).unwrap();
    let queries: Vec<Vec<f32>> = (0..nq).map(|_| (0..dim).map(|_| r.random()).collect()).collect();
    let refs: Vec<&[f32]> = queries.iter().map(Vec::as_slice).collect();
    let start = Instant::now();
    let hits = idx.knn_batch(&refs, 10, None).unwrap();
    println!("{} queries in {:.2}s", hits.len(), start.elapsed().as_secs_f64());
}
