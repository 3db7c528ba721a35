mod common;

use common::*;
use ndbench_core::dataset::{Label, NdPair};
use ndbench_core::evaluation::*;
use ndbench_core::mining::Strategy;
use proptest::prelude::*;
use rand::Rng;

/// Scores drawn from a small integer grid so ties are frequent.
fn tied_scores(seed: u64, n: usize) -> Vec<f64> {
    let mut r = rng(seed);
    (0..n).map(|_| r.random_range(0..12) as f64 * 0.25).collect()
}

fn scored(pos: &[f64], neg: &[f64]) -> Vec<ScoredPair> {
    let mut out = Vec::new();
    for (i, &d) in pos.iter().enumerate() {
        out.push(ScoredPair::new(NdPair::new(format!("p{i}"), format!("p{i}x"), Label::Ind).unwrap(), d).unwrap());
    }
    for (i, &d) in neg.iter().enumerate() {
        out.push(ScoredPair::new(NdPair::new(format!("n{i}"), format!("n{i}x"), Label::Nnd).unwrap(), d).unwrap());
    }
    out
}

/// Hanley–McNeil variance rewritten as `A(1−A)·[1 + (n⁺−1)(1−A)/(2−A) + (n⁻−1)A/(1+A)] / (n⁺n⁻)`.
fn hanley_factored(a: f64, np: usize, nn: usize) -> f64 {
    let bracket = 1.0 + (np as f64 - 1.0) * (1.0 - a) / (2.0 - a) + (nn as f64 - 1.0) * a / (1.0 + a);
    (a * (1.0 - a) * bracket / (np as f64 * nn as f64)).sqrt()
}

#[test]
fn perfect_separation_and_inversion() {
    assert_eq!(auc_indicator(&[0.1, 0.2], &[0.5, 0.9]).unwrap(), 1.0);
    assert_eq!(auc_indicator(&[0.5, 0.9], &[0.1, 0.2]).unwrap(), 0.0);
    assert_eq!(auc_indicator(&[0.3, 0.3], &[0.3]).unwrap(), 0.5);
}

#[test]
fn empty_side_is_an_error() {
    assert!(auc_indicator(&[], &[1.0]).is_err());
    assert!(roc_from_scores(&[1.0], &[]).is_err());
}

#[test]
fn roc_endpoints_and_monotonicity() {
    let pos = tied_scores(1, 40);
    let neg: Vec<f64> = tied_scores(2, 150).iter().map(|v| v + 0.5).collect();
    let c = roc_from_scores(&pos, &neg).unwrap();
    let first = c.points.first().unwrap();
    let last = c.points.last().unwrap();
    assert_eq!((first.tpr, first.fpr), (0.0, 0.0));
    assert_eq!((last.tpr, last.fpr), (1.0, 1.0));
    for w in c.points.windows(2) {
        assert!(w[0].threshold < w[1].threshold);
        assert!(w[0].tpr <= w[1].tpr && w[0].fpr <= w[1].fpr);
    }
}

#[test]
fn sens_spec_matches_definition() {
    let pos = [0.1, 0.4, 0.7];
    let neg = [0.2, 0.4, 0.9, 1.5];
    let (sens, spec) = sens_spec_at(&scored(&pos, &neg), 0.4).unwrap();
    assert_eq!(sens, 1.0 / 3.0);
    assert_eq!(spec, 3.0 / 4.0);
}

#[test]
fn hanley_fixed_points() {
    assert_eq!(auc_ci_hanley(1.0, 10, 10), (1.0, 1.0));
    assert_eq!(hanley_se(0.5, 1, 1), 0.5);
    assert_eq!(auc_ci_hanley(0.5, 1, 1), (0.0, 1.0));
}

#[test]
fn specificity_projection_is_exact() {
    let p = fp_projection(Specificity::one_minus(1e-9).unwrap(), 1_000_000, 1_000_000);
    assert_eq!(p.fp_count, 1000.0);
    assert_eq!(p.fp_per_query, 1e-3);
    let within = fp_projection_within(Specificity::one_minus(1e-9).unwrap(), 1_000_000);
    assert!((within - 499.9995).abs() < 1e-9);
    assert!(Specificity::new(1.5).is_err());
    assert_eq!(expected_tp(0.8, 250.0).unwrap(), 200.0);
}

#[test]
fn hard_negatives_never_raise_auc() {
    for trial in 0..40u64 {
        let mut r = rng(trial);
        let pos: Vec<f64> = (0..10).map(|_| r.random::<f64>() * 2.0).collect();
        let neg: Vec<f64> = (0..20 * 50).map(|_| r.random::<f64>() * 3.0).collect();
        let m = NegativeMatrix::new(20, 50, neg).unwrap();
        for (s, knn, total) in [(Strategy::Hn1, 1, 20), (Strategy::Hn2, 5, 60), (Strategy::Hn2, 50, 1000)] {
            let rep = verify_upper_bound(&pos, &m, s, knn, total).unwrap();
            assert!(rep.auc_hn_at_most_full, "{rep:?}");
        }
    }
}

#[test]
fn threshold_at_fpr_is_an_order_statistic() {
    let neg: Vec<f64> = (0..1000).map(|i| i as f64).collect();
    let c = roc_from_scores(&[0.5], &neg).unwrap();
    for rate in [0.001, 0.01, 0.1, 0.5] {
        let t = c.threshold_at_fpr(rate).unwrap();
        let below = neg.iter().filter(|&&d| d < t).count();
        assert_eq!(below, (rate * 1000.0).round() as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn indicator_auc_matches_oracles(seed in any::<u64>(), np in 1usize..50, nn in 1usize..200) {
        let pos = tied_scores(seed, np);
        let neg = tied_scores(seed ^ 0x5555, nn);
        let a = auc_indicator(&pos, &neg).unwrap();
        prop_assert_eq!(a, double_loop_auc(&pos, &neg));
        let c = roc_from_scores(&pos, &neg).unwrap();
        prop_assert_eq!(c.auc, a);
        prop_assert!((c.trapezoid_auc() - a).abs() < 1e-12);
    }

    #[test]
    fn auc_invariant_under_monotone_transform(seed in any::<u64>()) {
        let pos = tied_scores(seed, 20);
        let neg = tied_scores(seed.wrapping_add(1), 60);
        let f = |v: &f64| (v * 3.0 + 1.0).ln();
        let a = auc_indicator(&pos, &neg).unwrap();
        let b = auc_indicator(&pos.iter().map(f).collect::<Vec<_>>(), &neg.iter().map(f).collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hanley_matches_factored_form(a in 0.0f64..=1.0, np in 1usize..5000, nn in 1usize..5000) {
        prop_assert!((hanley_se(a, np, nn) - hanley_factored(a, np, nn)).abs() < 1e-12);
        let (lo, hi) = auc_ci_hanley(a, np, nn);
        prop_assert!(0.0 <= lo && lo <= a && a <= hi && hi <= 1.0);
    }

    #[test]
    fn scored_pairs_agree_with_raw_scores(seed in any::<u64>()) {
        let pos = tied_scores(seed, 15);
        let neg = tied_scores(!seed, 40);
        let c = roc(&scored(&pos, &neg)).unwrap();
        prop_assert_eq!(c.auc, auc_indicator(&pos, &neg).unwrap());
        prop_assert_eq!((c.n_pos, c.n_neg), (15, 40));
    }
}
