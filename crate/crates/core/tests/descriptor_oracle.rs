mod common;

use common::*;
use ndbench_core::descriptors::*;
use proptest::prelude::*;

fn random_map(seed: u64, h: usize, w: usize, c: usize) -> (FeatureMap, Vec<f32>) {
    let mut r = rng(seed);
    let data: Vec<f32> = uniform(&mut r, h * w * c).into_iter().map(|v| v * 4.0).collect();
    (FeatureMap::new(h, w, c, data.clone()).unwrap(), data)
}

fn trained_pca(seed: u64, d: usize, n: usize) -> PcaModel {
    let mut r = rng(seed);
    let train: Vec<Descriptor> =
        correlated_samples(&mut r, n, d).into_iter().map(|v| Descriptor::new(v).unwrap()).collect();
    pca_train(&train, DEFAULT_EPSILON).unwrap()
}

fn gray(seed: u64, side: usize) -> Raster {
    let mut r = rng(seed);
    Raster::gray(side, uniform(&mut r, side * side).into_iter().map(|v| v * 255.0).collect()).unwrap()
}

#[test]
fn spoc_matches_triple_loop() {
    let (map, data) = random_map(1, 7, 7, 512);
    let got = spoc_aggregate(&map).unwrap();
    for (g, w) in got.values().iter().zip(spoc_oracle(&data, 7, 7, 512)) {
        assert!((*g as f64 - w).abs() <= 1e-5 * w.abs().max(1.0));
    }
}

#[test]
fn spoc_is_linear() {
    let (m1, d1) = random_map(2, 5, 6, 16);
    let (m2, d2) = random_map(3, 5, 6, 16);
    let (a, b) = (0.75f32, 2.5f32);
    let mix: Vec<f32> = d1.iter().zip(&d2).map(|(x, y)| a * x + b * y).collect();
    let s = spoc_aggregate(&FeatureMap::new(5, 6, 16, mix).unwrap()).unwrap();
    let s1 = spoc_aggregate(&m1).unwrap();
    let s2 = spoc_aggregate(&m2).unwrap();
    for i in 0..16 {
        let want = a * s1.values()[i] + b * s2.values()[i];
        assert!((s.values()[i] - want).abs() < 1e-5 * want.abs().max(1.0));
    }
}

#[test]
fn pca_whitening_gives_identity_covariance() {
    let mut r = rng(4);
    let samples = correlated_samples(&mut r, 1000, 64);
    let train: Vec<Descriptor> = samples.iter().map(|v| Descriptor::new(v.clone()).unwrap()).collect();
    let pca = pca_train(&train, DEFAULT_EPSILON).unwrap();
    let out: Vec<Vec<f64>> = samples.iter().map(|v| pca.transform(v).unwrap()).collect();
    let err = covariance_identity_error(&out);
    assert!(err < 1e-6, "covariance deviates by {err}");
}

#[test]
fn pca_components_are_orthonormal_and_sorted() {
    let pca = trained_pca(5, 12, 300);
    let d = pca.dim();
    for i in 0..d {
        for j in 0..d {
            let dot: f64 = pca.component(i).iter().zip(pca.component(j)).map(|(a, b)| a * b).sum();
            assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-9);
        }
    }
    assert!(pca.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn identity_model_only_normalizes() {
    let v = Descriptor::new(vec![3.0, 0.0, -4.0]).unwrap();
    let w = pca_whiten(&v, &PcaModel::identity(3).with_epsilon(0.0)).unwrap();
    assert_eq!(w.values(), &[0.6, 0.0, -0.8]);
    assert!(w.is_normalized());
}

#[test]
fn region_grids_match_hand_enumeration() {
    let cfg = RmacConfig::default();
    let tuples = |h, w| -> Vec<(usize, usize, usize)> {
        rmac_regions(h, w, &cfg).unwrap().iter().map(|r| (r.x, r.y, r.side)).collect()
    };
    assert_eq!(tuples(8, 8), RMAC_8X8_L2);
    assert_eq!(tuples(7, 10), RMAC_7X10_L2);
    let transposed: Vec<_> = RMAC_7X10_L2.iter().map(|&(x, y, s)| (y, x, s)).collect();
    let mut got = tuples(10, 7);
    got.sort();
    let mut want = transposed;
    want.sort();
    assert_eq!(got, want);
}

#[test]
fn rmac_matches_region_oracle() {
    for (h, w, regions) in [(8, 8, &RMAC_8X8_L2[..]), (7, 10, &RMAC_7X10_L2[..])] {
        let (map, data) = random_map(6, h, w, 32);
        let pca = trained_pca(7, 32, 400);
        let got = rmac_aggregate(&map, &RmacConfig::default(), &pca).unwrap();
        let want = rmac_oracle(&data, w, 32, regions, pca.mean(), pca.components(), pca.eigenvalues(), pca.epsilon());
        for (g, o) in got.values().iter().zip(&want) {
            assert!((*g as f64 - o).abs() < 1e-5);
        }
        assert!((got.norm() - 1.0).abs() < UNIT_NORM_TOLERANCE);
    }
}

#[test]
fn rmac_rejects_tiny_maps_and_wrong_pca() {
    let (map, _) = random_map(8, 1, 1, 4);
    let cfg = RmacConfig { max_scale: 3, ..Default::default() };
    assert!(rmac_aggregate(&map, &cfg, &PcaModel::identity(4)).is_err());
    let (map, _) = random_map(9, 4, 4, 4);
    assert!(rmac_aggregate(&map, &RmacConfig::default(), &PcaModel::identity(5)).is_err());
}

#[test]
fn gist_block_pooling_matches_oracle() {
    let cfg = GistConfig { image_side: 64, ..Default::default() };
    let img = gray(10, 64);
    let responses = gabor_responses(&img, &cfg).unwrap();
    assert_eq!(responses.len(), 32);
    let d = gist_extract(&img, &cfg).unwrap();
    let want: Vec<f64> = responses.iter().flat_map(|r| block_means(r, 64, 4)).collect();
    assert_eq!(d.dim(), want.len());
    for (g, w) in d.values().iter().zip(&want) {
        assert!((*g as f64 - w).abs() <= 1e-5 * w.abs().max(1.0));
    }
}

#[test]
fn gist_uneven_blocks() {
    let cfg =
        GistConfig { image_side: 30, scales: 2, orientations_per_scale: 4, blocks: 4, pooling: BlockPooling::Mean };
    let img = gray(11, 30);
    let responses = gabor_responses(&img, &cfg).unwrap();
    let d = gist_extract(&img, &cfg).unwrap();
    assert_eq!(d.dim(), 16 * 8);
    let want: Vec<f64> = responses.iter().flat_map(|r| block_means(r, 30, 4)).collect();
    for (g, w) in d.values().iter().zip(&want) {
        assert!((*g as f64 - w).abs() <= 1e-5 * w.abs().max(1.0));
    }
}

#[test]
fn gist_is_deterministic_and_translation_sensitive() {
    let cfg = GistConfig { image_side: 64, ..Default::default() };
    let mut data = vec![0.0f32; 64 * 64];
    for y in 10..30 {
        for x in 12..20 {
            data[y * 64 + x] = 200.0;
        }
    }
    let img = Raster::gray(64, data.clone()).unwrap();
    let a = gist_extract(&img, &cfg).unwrap();
    let b = gist_extract(&img, &cfg).unwrap();
    assert_eq!(
        a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
        b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
    );
    let mut shifted = vec![0.0f32; 64 * 64];
    for y in 0..64 {
        for x in 0..64 {
            shifted[y * 64 + (x + 20) % 64] = data[y * 64 + x];
        }
    }
    let c = gist_extract(&Raster::gray(64, shifted).unwrap(), &cfg).unwrap();
    assert_ne!(a, c);
}

#[test]
fn triplet_worked_examples() {
    let d = |v: &[f32]| Descriptor::new(v.to_vec()).unwrap();
    let (q, p, n) = (d(&[0.0, 0.0]), d(&[1.0, 0.0]), d(&[0.0, 2.0]));
    assert_eq!(triplet_loss(&q, &p, &n, 1.0).unwrap(), 0.0);
    assert_eq!(triplet_loss(&q, &p, &n, 4.0).unwrap(), 0.5);
    assert_eq!(triplet_loss(&q, &q, &q, 0.7).unwrap(), 0.35);
    assert!(triplet_loss(&q, &d(&[1.0]), &n, 1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn whitened_vectors_have_unit_norm(seed in any::<u64>()) {
        let pca = trained_pca(seed, 8, 100);
        let mut r = rng(seed ^ 1);
        let v = Descriptor::new(gaussian(&mut r, 8)).unwrap();
        let w = pca_whiten(&v, &pca).unwrap();
        prop_assert!((w.norm() - 1.0).abs() < UNIT_NORM_TOLERANCE);
    }

    #[test]
    fn gist_dim_formula(scales in 1usize..4, orients in 1usize..6, blocks in 1usize..5) {
        let cfg = GistConfig { image_side: 16, scales, orientations_per_scale: orients, blocks, pooling: BlockPooling::Mean };
        let d = gist_extract(&gray(scales as u64, 16), &cfg).unwrap();
        prop_assert_eq!(d.dim(), blocks * blocks * scales * orients);
    }

    #[test]
    fn hinge_inactive_when_negative_far(shift in 0.0f32..5.0, m in 0.0f64..3.0) {
        let q = Descriptor::new(vec![0.0, 0.0]).unwrap();
        let p = Descriptor::new(vec![0.5, 0.0]).unwrap();
        let far = (m + 0.25).sqrt() as f32 + shift;
        let n = Descriptor::new(vec![0.0, far]).unwrap();
        prop_assert_eq!(triplet_loss(&q, &p, &n, m).unwrap(), 0.0);
    }
}
