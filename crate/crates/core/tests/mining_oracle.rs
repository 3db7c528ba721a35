mod common;

use std::collections::BTreeMap;

use common::*;
use ndbench_core::index::FlatIndex;
use ndbench_core::mining::{mine_hn1, mine_hn2, project_fp_rate, specificity_floor, MiningConfig};
use proptest::prelude::*;

struct Design {
    pool: FlatIndex,
    queries: Vec<String>,
    source: BTreeMap<String, Vec<f32>>,
    /// `matrix[q][m]` in f64.
    matrix: Vec<Vec<f64>>,
}

fn design(seed: u64, k: usize, m: usize, dim: usize) -> Design {
    let mut r = rng(seed);
    let pool_data = gaussian(&mut r, m * dim);
    let pool = FlatIndex::build(pool_data.clone(), dim, ids("p", m)).unwrap();
    let queries = ids("q", k);
    let mut source = BTreeMap::new();
    let mut matrix = Vec::new();
    for q in &queries {
        let v = gaussian(&mut r, dim);
        matrix.push(pool_data.chunks_exact(dim).map(|row| naive_l2(row, &v)).collect());
        source.insert(q.clone(), v);
    }
    Design { pool, queries, source, matrix }
}

#[test]
fn hn1_is_row_argmin() {
    let d = design(11, 20, 200, 16);
    let set = mine_hn1(&d.pool, &d.queries, &d.source).unwrap();
    assert_eq!(set.len(), 20);
    for (qi, p) in set.pairs.iter().enumerate() {
        let (m, best) = d.matrix[qi].iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert_eq!(p.query_id, d.queries[qi]);
        assert_eq!(p.pool_id, d.pool.id(m));
        assert!((p.distance as f64 - best).abs() < 1e-5);
    }
}

#[test]
fn hn2_matches_matrix_oracle() {
    let d = design(12, 20, 200, 16);
    let set = mine_hn2(&d.pool, &d.queries, &d.source, &MiningConfig::hn2(3, 15)).unwrap();
    let want = oracle_hn2(&d.matrix, 3, 15);
    assert_eq!(set.len(), 15);
    for (p, w) in set.pairs.iter().zip(&want) {
        assert_eq!(p.query_id, d.queries[w.1]);
        assert_eq!(p.pool_id, d.pool.id(w.2));
        assert!((p.distance as f64 - w.0).abs() < 1e-5);
    }
}

#[test]
fn hn2_single_neighbor_reduces_to_hn1() {
    let d = design(13, 20, 200, 16);
    let hn1 = mine_hn1(&d.pool, &d.queries, &d.source).unwrap();
    let hn2 = mine_hn2(&d.pool, &d.queries, &d.source, &MiningConfig::hn2(1, 20)).unwrap();
    let mut a: Vec<_> = hn1.pairs.iter().map(|p| (p.query_id.clone(), p.pool_id.clone())).collect();
    let mut b: Vec<_> = hn2.pairs.iter().map(|p| (p.query_id.clone(), p.pool_id.clone())).collect();
    a.sort();
    b.sort();
    assert_eq!(a, b);
}

#[test]
fn hn2_exact_regime_is_global_top() {
    let d = design(14, 10, 60, 8);
    let total = 50;
    let set = mine_hn2(&d.pool, &d.queries, &d.source, &MiningConfig::hn2(60, total)).unwrap();
    let mut all: Vec<(f64, usize, usize)> =
        d.matrix.iter().enumerate().flat_map(|(q, row)| row.iter().enumerate().map(move |(m, &v)| (v, q, m))).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (p, w) in set.pairs.iter().zip(&all[..total]) {
        assert_eq!((p.query_id.as_str(), p.pool_id.as_str()), (d.queries[w.1].as_str(), d.pool.id(w.2)));
    }
}

#[test]
fn benchmark_scale_arithmetic() {
    // 4,400 queries over 80,000 images
    let floor = specificity_floor(4_400, 80_000);
    assert!((floor - 2.840909e-9).abs() < 1e-15);
    assert!((project_fp_rate(0.1, 80_000) - 1.25e-6).abs() < 1e-20);
    assert!((project_fp_rate(0.1, 70_000) - 1.428571e-6).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hn2_selection_is_global_minimum_over_candidates(seed in 0u64..10_000, knn in 1usize..6, total in 1usize..40) {
        let d = design(seed, 8, 30, 4);
        let set = mine_hn2(&d.pool, &d.queries, &d.source, &MiningConfig::hn2(knn, total)).unwrap();
        let candidates = oracle_hn2(&d.matrix, knn, usize::MAX);
        prop_assert_eq!(set.len(), total.min(candidates.len()));
        let worst_kept = set.pairs.iter().map(|p| p.distance as f64).fold(0.0, f64::max);
        let chosen: std::collections::BTreeSet<(String, String)> =
            set.pairs.iter().map(|p| (p.query_id.clone(), p.pool_id.clone())).collect();
        for c in candidates {
            let key = (d.queries[c.1].clone(), d.pool.id(c.2).to_string());
            if !chosen.contains(&key) {
                prop_assert!(c.0 >= worst_kept - 1e-5);
            }
        }
        prop_assert!(set.pairs.windows(2).all(|w| w[0].distance <= w[1].distance));
    }

    #[test]
    fn mining_is_deterministic(seed in 0u64..10_000) {
        let d = design(seed, 6, 40, 4);
        let cfg = MiningConfig::hn2(4, 10);
        let a = mine_hn2(&d.pool, &d.queries, &d.source, &cfg).unwrap();
        let b = mine_hn2(&d.pool, &d.queries, &d.source, &cfg).unwrap();
        prop_assert_eq!(a, b);
    }
}
