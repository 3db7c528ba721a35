mod common;

use common::*;
use ndbench_core::index::{l2, squared_l2, FlatIndex};
use proptest::prelude::*;

fn random_index(seed: u64, n: usize, dim: usize) -> (FlatIndex, Vec<f32>) {
    let mut r = rng(seed);
    let data = gaussian(&mut r, n * dim);
    (FlatIndex::build(data.clone(), dim, ids("r", n)).unwrap(), data)
}

#[test]
fn knn_matches_naive_scan_64d() {
    let (idx, data) = random_index(1, 1000, 64);
    let mut r = rng(2);
    for _ in 0..50 {
        let q = gaussian(&mut r, 64);
        let got = idx.knn(&q, 10).unwrap();
        let want = &naive_scan(&data, 64, &q)[..10];
        for (g, w) in got.iter().zip(want) {
            assert_eq!(g.row, w.1);
            assert!((g.distance as f64 - w.0).abs() < 1e-5);
        }
    }
}

#[test]
fn knn_exact_for_several_k() {
    let (idx, data) = random_index(3, 3000, 32);
    let mut r = rng(4);
    let queries: Vec<Vec<f32>> = (0..100).map(|_| gaussian(&mut r, 32)).collect();
    let refs: Vec<&[f32]> = queries.iter().map(|q| q.as_slice()).collect();
    for k in [1, 5, 10] {
        let got = idx.knn_batch(&refs, k, None).unwrap();
        for (q, g) in queries.iter().zip(&got) {
            let want = naive_scan(&data, 32, q);
            assert_eq!(g.len(), k);
            for (a, b) in g.iter().zip(&want) {
                assert_eq!(a.row, b.1);
                assert!((a.distance as f64 - b.0).abs() < 1e-5);
            }
        }
    }
}

#[test]
fn self_distance_is_zero() {
    let (idx, _) = random_index(5, 500, 16);
    for i in 0..idx.len() {
        let hit = idx.knn(idx.row(i), 1).unwrap()[0];
        assert!(hit.distance.abs() < 1e-6);
        assert_eq!(hit.row, i);
    }
}

#[test]
fn range_equals_filtered_full_sort() {
    let (idx, _) = random_index(6, 800, 8);
    let mut r = rng(7);
    for _ in 0..30 {
        let q = gaussian(&mut r, 8);
        let all = idx.knn(&q, idx.len()).unwrap();
        for t in [0.5f32, 1.5, 2.5, 3.5] {
            let want: Vec<_> = all.iter().copied().filter(|n| n.distance < t).collect();
            assert_eq!(idx.range_query(&q, t, None).unwrap(), want);
            let capped = idx.range_query(&q, t, Some(5)).unwrap();
            assert_eq!(capped.as_slice(), &want[..want.len().min(5)]);
        }
        let five = idx.range_query(&q, f32::INFINITY, Some(5)).unwrap();
        assert_eq!(five, idx.knn(&q, 5).unwrap());
    }
}

#[test]
fn range_below_min_distance_is_empty() {
    let idx = FlatIndex::build(vec![0.0, 0.0, 3.0, 4.0], 2, ids("r", 2)).unwrap();
    assert!(idx.range_query(&[10.0, 10.0], 1.0, None).unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_is_symmetric(a in prop::collection::vec(-10.0f32..10.0, 1..70), seed in 0u64..1000) {
        let mut r = rng(seed);
        let b = gaussian(&mut r, a.len());
        prop_assert_eq!(squared_l2(&a, &b).to_bits(), squared_l2(&b, &a).to_bits());
        prop_assert!(l2(&a, &a) == 0.0);
    }

    #[test]
    fn range_monotone_in_threshold(seed in 0u64..1000, t1 in 0.1f32..4.0, dt in 0.0f32..2.0) {
        let (idx, _) = random_index(seed, 200, 4);
        let mut r = rng(seed + 1);
        let q = gaussian(&mut r, 4);
        let small = idx.range_query(&q, t1, None).unwrap();
        let large = idx.range_query(&q, t1 + dt, None).unwrap();
        prop_assert!(small.len() <= large.len());
        prop_assert_eq!(small.as_slice(), &large[..small.len()]);
    }
}
