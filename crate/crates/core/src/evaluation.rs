//! ROC analysis of a distance-threshold ND classifier.
//!
//! A pair is classified as near-duplicate when its distance is strictly below
//! the threshold `t`. Sensitivity is the fraction of ND (IND or NIND) pairs
//! accepted, specificity the fraction of NND pairs rejected.
//!
//! AUC is the Mann–Whitney statistic with the score oriented so that a
//! smaller distance is more positive: each (positive, negative) pair
//! contributes 1 when the positive is strictly closer, ½ on a tie, 0
//! otherwise. With this tie convention it equals the trapezoidal area under
//! the empirical ROC curve.

use alloc::vec::Vec;

use crate::dataset::{Label, NdPair};
use crate::error::{Error, PairSide, Result};
use crate::mining::Strategy;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub pair: NdPair,
    pub distance: f64,
}

impl ScoredPair {
    pub fn new(pair: NdPair, distance: f64) -> Result<Self> {
        if !distance.is_finite() || distance < 0.0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "pair distance must be finite and >= 0, got {distance}"
            )));
        }
        Ok(Self { pair, distance })
    }

    pub fn is_positive(&self) -> bool {
        self.pair.label.is_positive()
    }
}

/// Which positives count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// IND and NIND pairs are both positives.
    #[default]
    All,
    /// Only IND pairs are positives; NIND pairs are dropped from both sides.
    IndOnly,
}

/// Positive and negative distances under `mode`.
pub fn split_scores(pairs: &[ScoredPair], mode: EvalMode) -> (Vec<f64>, Vec<f64>) {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for p in pairs {
        match (p.pair.label, mode) {
            (Label::Nnd, _) => neg.push(p.distance),
            (Label::Nind, EvalMode::IndOnly) => {}
            _ => pos.push(p.distance),
        }
    }
    (pos, neg)
}

fn require_both(pos: &[f64], neg: &[f64]) -> Result<()> {
    if pos.is_empty() {
        return Err(Error::NoPairs(PairSide::Positive));
    }
    if neg.is_empty() {
        return Err(Error::NoPairs(PairSide::Negative));
    }
    Ok(())
}

/// `(sensitivity, specificity)` of the classifier `distance < t`.
pub fn sens_spec_at(pairs: &[ScoredPair], t: f64) -> Result<(f64, f64)> {
    let (pos, neg) = split_scores(pairs, EvalMode::All);
    require_both(&pos, &neg)?;
    let tp = pos.iter().filter(|&&d| d < t).count();
    let tn = neg.iter().filter(|&&d| d >= t).count();
    Ok((tp as f64 / pos.len() as f64, tn as f64 / neg.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// Ascending in threshold, from `-∞` to `+∞`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub auc_ci_95: (f64, f64),
    pub n_pos: usize,
    pub n_neg: usize,
}

impl RocCurve {
    /// Trapezoidal area under the curve points.
    pub fn trapezoid_auc(&self) -> f64 {
        trapezoid_auc(&self.points)
    }

    /// Largest curve threshold whose FP rate does not exceed `rate`.
    pub fn threshold_at_fpr(&self, rate: f64) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.fpr <= rate)
            .map(|p| p.threshold)
            .fold(None, |best: Option<f64>, t| Some(best.map_or(t, |b| b.max(t))))
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// Twice the Mann–Whitney count: 2 per positive strictly closer than a
/// negative, 1 per tie.
fn doubled_mann_whitney(pos: &[f64], neg: &[f64]) -> u128 {
    let pos = sorted(pos.to_vec());
    let neg = sorted(neg.to_vec());
    let n_neg = neg.len() as u128;
    let mut total = 0u128;
    let mut j = 0usize;
    let mut i = 0usize;
    while i < pos.len() {
        let d = pos[i];
        let mut run = 0u128;
        while i < pos.len() && pos[i] == d {
            run += 1;
            i += 1;
        }
        while j < neg.len() && neg[j] < d {
            j += 1;
        }
        let below = j;
        let mut ties = 0usize;
        while below + ties < neg.len() && neg[below + ties] == d {
            ties += 1;
        }
        let above = n_neg - below as u128 - ties as u128;
        total += run * (2 * above + ties as u128);
    }
    total
}

/// AUC as the (tie-corrected) indicator sum over all positive × negative
/// pairs, computed in `O((P+N) log(P+N))`.
pub fn auc_indicator(pos: &[f64], neg: &[f64]) -> Result<f64> {
    require_both(pos, neg)?;
    let doubled = doubled_mann_whitney(pos, neg);
    Ok((doubled as f64 / 2.0) / (pos.len() as f64 * neg.len() as f64))
}

pub fn trapezoid_auc(points: &[RocPoint]) -> f64 {
    points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum()
}

fn curve_at(pos: &[f64], neg: &[f64], thresholds: impl Iterator<Item = f64>) -> Vec<RocPoint> {
    let (np, nn) = (pos.len() as f64, neg.len() as f64);
    thresholds
        .map(|t| RocPoint {
            threshold: t,
            tpr: pos.partition_point(|&d| d < t) as f64 / np,
            fpr: neg.partition_point(|&d| d < t) as f64 / nn,
        })
        .collect()
}

fn finish_curve(pos: &[f64], neg: &[f64], points: Vec<RocPoint>) -> Result<RocCurve> {
    let auc = auc_indicator(pos, neg)?;
    Ok(RocCurve {
        points,
        auc,
        auc_ci_95: auc_ci_hanley(auc, pos.len(), neg.len()),
        n_pos: pos.len(),
        n_neg: neg.len(),
    })
}

/// Exact ROC curve: thresholds at `-∞`, every distinct distance, and `+∞`.
pub fn roc(pairs: &[ScoredPair]) -> Result<RocCurve> {
    roc_with_mode(pairs, EvalMode::All)
}

pub fn roc_with_mode(pairs: &[ScoredPair], mode: EvalMode) -> Result<RocCurve> {
    let (pos, neg) = split_scores(pairs, mode);
    roc_from_scores(&pos, &neg)
}

pub fn roc_from_scores(pos: &[f64], neg: &[f64]) -> Result<RocCurve> {
    require_both(pos, neg)?;
    let pos = sorted(pos.to_vec());
    let neg = sorted(neg.to_vec());
    let mut thresholds: Vec<f64> = pos.iter().chain(&neg).copied().collect();
    thresholds.sort_unstable_by(f64::total_cmp);
    thresholds.dedup();
    let points = curve_at(
        &pos,
        &neg,
        core::iter::once(f64::NEG_INFINITY).chain(thresholds).chain(core::iter::once(f64::INFINITY)),
    );
    finish_curve(&pos, &neg, points)
}

/// ROC curve on a fixed grid of `grid` evenly spaced thresholds between the
/// smallest and largest distance, plus the `±∞` sentinels. The AUC is still
/// the exact indicator sum.
pub fn roc_grid(pairs: &[ScoredPair], mode: EvalMode, grid: usize) -> Result<RocCurve> {
    if grid < 2 {
        return Err(Error::InvalidArgument("ROC grid needs at least 2 thresholds".into()));
    }
    let (pos, neg) = split_scores(pairs, mode);
    require_both(&pos, &neg)?;
    let pos = sorted(pos);
    let neg = sorted(neg);
    let lo = pos[0].min(neg[0]);
    let hi = pos[pos.len() - 1].max(neg[neg.len() - 1]);
    let step = (hi - lo) / (grid - 1) as f64;
    let points = curve_at(
        &pos,
        &neg,
        core::iter::once(f64::NEG_INFINITY)
            .chain((0..grid).map(|i| lo + step * i as f64))
            .chain(core::iter::once(f64::INFINITY)),
    );
    finish_curve(&pos, &neg, points)
}

/// Hanley–McNeil standard error of an AUC estimate.
pub fn hanley_se(auc: f64, n_pos: usize, n_neg: usize) -> f64 {
    let a = auc;
    let q1 = a / (2.0 - a);
    let q2 = 2.0 * a * a / (1.0 + a);
    let var = (a * (1.0 - a) + (n_pos as f64 - 1.0) * (q1 - a * a) + (n_neg as f64 - 1.0) * (q2 - a * a))
        / (n_pos as f64 * n_neg as f64);
    libm::sqrt(var.max(0.0))
}

/// 95% normal-approximation interval `auc ± 1.96·SE`, clipped to `[0, 1]`.
pub fn auc_ci_hanley(auc: f64, n_pos: usize, n_neg: usize) -> (f64, f64) {
    let se = hanley_se(auc, n_pos.max(1), n_neg.max(1));
    ((auc - Z_95 * se).max(0.0), (auc + Z_95 * se).min(1.0))
}

/// A specificity stored as its complement (the FP rate), so that values
/// such as `1 − 10⁻⁹` keep full precision.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Specificity {
    fp_rate: f64,
}

impl Specificity {
    pub fn new(specificity: f64) -> Result<Self> {
        Self::from_fp_rate(1.0 - specificity)
    }

    /// Specificity `1 − fp_rate`.
    pub fn one_minus(fp_rate: f64) -> Result<Self> {
        Self::from_fp_rate(fp_rate)
    }

    pub fn from_fp_rate(fp_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fp_rate) {
            return Err(Error::InvalidArgument(alloc::format!("specificity must lie in [0, 1] (FP rate {fp_rate})")));
        }
        Ok(Self { fp_rate })
    }

    pub fn value(self) -> f64 {
        1.0 - self.fp_rate
    }

    pub fn fp_rate(self) -> f64 {
        self.fp_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpProjection {
    /// Expected false positives over all `|X|·|Y|` ordered pairs.
    pub fp_count: f64,
    /// Expected false positives per query image, `(1 − spec)·|Y|`.
    pub fp_per_query: f64,
}

/// False positives of a threshold with the given specificity when `|X|`
/// queries are run against `|Y|` images. Assumes the ND pairs are a
/// negligible fraction of `|Y|`.
pub fn fp_projection(spec: Specificity, queries: usize, collection: usize) -> FpProjection {
    FpProjection {
        fp_count: spec.fp_rate * queries as f64 * collection as f64,
        fp_per_query: spec.fp_rate * collection as f64,
    }
}

/// False positives among the `n(n−1)/2` unordered pairs of one collection
/// searched against itself. This is about half of `fp_projection(spec, n, n)`,
/// which counts ordered pairs including self-pairs.
pub fn fp_projection_within(spec: Specificity, n: usize) -> f64 {
    let n = n as f64;
    spec.fp_rate * n * (n - 1.0) / 2.0
}

/// `Sens(t)·|X ∩ND Y|`.
pub fn expected_tp(sensitivity: f64, nd_count: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&sensitivity) {
        return Err(Error::InvalidArgument(alloc::format!("sensitivity must lie in [0, 1], got {sensitivity}")));
    }
    Ok(sensitivity * nd_count)
}

/// All `K × M` negative distances, one row per query.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeMatrix {
    queries: usize,
    pool: usize,
    distances: Vec<f64>,
}

impl NegativeMatrix {
    pub fn new(queries: usize, pool: usize, distances: Vec<f64>) -> Result<Self> {
        if queries == 0 || pool == 0 {
            return Err(Error::Empty("negative matrix"));
        }
        if distances.len() != queries * pool {
            return Err(Error::DimensionMismatch { expected: queries * pool, actual: distances.len() });
        }
        if distances.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::NonFinite("negative distances"));
        }
        Ok(Self { queries, pool, distances })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn pool(&self) -> usize {
        self.pool
    }

    pub fn row(&self, q: usize) -> &[f64] {
        &self.distances[q * self.pool..(q + 1) * self.pool]
    }

    pub fn all(&self) -> &[f64] {
        &self.distances
    }

    /// Hard negatives selected directly from the matrix.
    pub fn hard_negatives(&self, strategy: Strategy, knn_per_query: usize, total_pairs: usize) -> Vec<f64> {
        let mut chosen: Vec<(f64, usize, usize)> = Vec::new();
        for q in 0..self.queries {
            let mut row: Vec<(f64, usize, usize)> = self.row(q).iter().enumerate().map(|(m, &d)| (d, q, m)).collect();
            row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
            let take = match strategy {
                Strategy::Hn1 => 1,
                Strategy::Hn2 => knn_per_query.min(self.pool),
            };
            chosen.extend_from_slice(&row[..take]);
        }
        if strategy == Strategy::Hn2 {
            chosen.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            chosen.truncate(total_pairs);
        }
        chosen.into_iter().map(|c| c.0).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    /// AUC over every negative pair.
    pub auc_full: f64,
    /// AUC over the mined hard negatives only.
    pub auc_hn: f64,
    pub hard_negatives: usize,
    /// `auc_hn ≥ auc_full`.
    pub bound_holds: bool,
    /// `auc_hn ≤ auc_full`. Hard negatives are the closest negatives, so
    /// with smaller-is-more-positive scoring they can only lower the AUC:
    /// this direction holds for `hn1` and for `hn2` over the full candidate
    /// set.
    pub auc_hn_at_most_full: bool,
}

impl BoundReport {
    /// Fails when `auc_hn < auc_full`.
    pub fn check(&self) -> Result<()> {
        if self.bound_holds {
            Ok(())
        } else {
            Err(Error::BoundViolated { auc_full: self.auc_full, auc_hn: self.auc_hn })
        }
    }
}

/// Compares the AUC over all `K × M` negatives with the AUC over the hard
/// negatives a strategy would mine from them.
pub fn verify_upper_bound(
    positives: &[f64],
    full_negatives: &NegativeMatrix,
    strategy: Strategy,
    knn_per_query: usize,
    total_pairs: usize,
) -> Result<BoundReport> {
    if strategy == Strategy::Hn2 && (knn_per_query == 0 || total_pairs == 0) {
        return Err(Error::InvalidArgument("knn_per_query and total_pairs must be >= 1".into()));
    }
    let auc_full = auc_indicator(positives, full_negatives.all())?;
    let hard = full_negatives.hard_negatives(strategy, knn_per_query, total_pairs);
    let auc_hn = auc_indicator(positives, &hard)?;
    Ok(BoundReport {
        auc_full,
        auc_hn,
        hard_negatives: hard.len(),
        bound_holds: auc_hn >= auc_full,
        auc_hn_at_most_full: auc_hn <= auc_full,
    })
}

/// Curve thresholds with the matching `(tpr, fpr)` as plain tuples.
pub fn curve_rows(curve: &RocCurve) -> Vec<(f64, f64, f64)> {
    curve.points.iter().map(|p| (p.threshold, p.tpr, p.fpr)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn scored(pos: &[f64], neg: &[f64]) -> Vec<ScoredPair> {
        let mut out = Vec::new();
        for (i, &d) in pos.iter().enumerate() {
            let p = NdPair::new(alloc::format!("p{i}a"), alloc::format!("p{i}b"), Label::Ind).unwrap();
            out.push(ScoredPair::new(p, d).unwrap());
        }
        for (i, &d) in neg.iter().enumerate() {
            let p = NdPair::new(alloc::format!("n{i}a"), alloc::format!("n{i}b"), Label::Nnd).unwrap();
            out.push(ScoredPair::new(p, d).unwrap());
        }
        out
    }

    #[test]
    fn sens_spec_cases() {
        let pairs = scored(&[1.0, 3.0], &[2.0, 4.0]);
        assert_eq!(sens_spec_at(&pairs, 2.5).unwrap(), (0.5, 0.5));
        assert_eq!(sens_spec_at(&pairs, 0.0).unwrap(), (0.0, 1.0));
        assert_eq!(sens_spec_at(&pairs, -1.0).unwrap(), (0.0, 1.0));
        assert_eq!(sens_spec_at(&pairs, 4.0001).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn sens_spec_names_empty_side() {
        assert_eq!(sens_spec_at(&scored(&[], &[1.0]), 1.0), Err(Error::NoPairs(PairSide::Positive)));
        assert_eq!(sens_spec_at(&scored(&[1.0], &[]), 1.0), Err(Error::NoPairs(PairSide::Negative)));
    }

    #[test]
    fn perfect_separation() {
        let c = roc(&scored(&[0.1, 0.2], &[0.5, 0.9, 1.0])).unwrap();
        assert_eq!(c.auc, 1.0);
        assert_eq!(c.auc_ci_95, (1.0, 1.0));
    }

    #[test]
    fn identical_distributions_half() {
        let c = roc(&scored(&[1.0, 2.0, 2.0, 5.0], &[5.0, 2.0, 1.0, 2.0])).unwrap();
        assert_eq!(c.auc, 0.5);
        assert!((c.trapezoid_auc() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn worked_example() {
        let c = roc(&scored(&[1.0, 2.0, 5.0], &[3.0, 4.0, 6.0, 7.0])).unwrap();
        assert_eq!(c.auc, 10.0 / 12.0);
        assert!((c.trapezoid_auc() - c.auc).abs() < 1e-12);
        assert_eq!((c.n_pos, c.n_neg), (3, 4));
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let c = roc(&scored(&[0.0, 1.0, 2.0], &[0.0, 1.5, 3.0])).unwrap();
        let first = c.points[0];
        let last = c.points[c.points.len() - 1];
        assert_eq!((first.tpr, first.fpr), (0.0, 0.0));
        assert_eq!((last.tpr, last.fpr), (1.0, 1.0));
        assert!(c
            .points
            .windows(2)
            .all(|w| w[0].threshold < w[1].threshold && w[0].tpr <= w[1].tpr && w[0].fpr <= w[1].fpr));
    }

    #[test]
    fn ind_only_drops_nind() {
        let mut pairs = scored(&[1.0], &[2.0]);
        let nind = NdPair::new("x", "y", Label::Nind).unwrap();
        pairs.push(ScoredPair::new(nind, 5.0).unwrap());
        assert_eq!(roc_with_mode(&pairs, EvalMode::All).unwrap().n_pos, 2);
        let c = roc_with_mode(&pairs, EvalMode::IndOnly).unwrap();
        assert_eq!((c.n_pos, c.n_neg), (1, 1));
        assert_eq!(c.auc, 1.0);
    }

    #[test]
    fn grid_mode_keeps_exact_auc() {
        let pairs = scored(&[1.0, 2.0, 5.0], &[3.0, 4.0, 6.0, 7.0]);
        let g = roc_grid(&pairs, EvalMode::All, 1000).unwrap();
        assert_eq!(g.points.len(), 1002);
        assert_eq!(g.auc, 10.0 / 12.0);
        assert!(roc_grid(&pairs, EvalMode::All, 1).is_err());
    }

    #[test]
    fn hanley_cases() {
        assert_eq!(hanley_se(1.0, 10, 20), 0.0);
        assert_eq!(hanley_se(0.5, 1, 1), 0.5);
        assert_eq!(auc_ci_hanley(0.5, 1, 1), (0.0, 1.0));
    }

    #[test]
    fn projections() {
        let p = fp_projection(Specificity::one_minus(1e-9).unwrap(), 1_000_000, 1_000_000);
        assert_eq!(p.fp_count, 1000.0);
        let w = fp_projection_within(Specificity::one_minus(1e-9).unwrap(), 1_000_000);
        assert!((w - 499.9995).abs() < 1e-9);
        let p = fp_projection(Specificity::new(1.0).unwrap(), 5, 7);
        assert_eq!((p.fp_count, p.fp_per_query), (0.0, 0.0));
        let p = fp_projection(Specificity::new(0.9).unwrap(), 1, 70_000);
        assert!((p.fp_per_query - 7000.0).abs() < 1e-9);
        assert!(Specificity::new(1.5).is_err());
    }

    #[test]
    fn expected_tp_cases() {
        assert!((expected_tp(0.96, 100.0).unwrap() - 96.0).abs() < 1e-12);
        assert_eq!(expected_tp(0.0, 1e6).unwrap(), 0.0);
        assert_eq!(expected_tp(0.5, 18_299.0).unwrap(), 9_149.5);
        assert!(expected_tp(1.2, 1.0).is_err());
    }

    #[test]
    fn degenerate_bound() {
        let m = NegativeMatrix::new(3, 4, vec![2.0; 12]).unwrap();
        for s in [Strategy::Hn1, Strategy::Hn2] {
            let r = verify_upper_bound(&[1.0, 3.0], &m, s, 4, 5).unwrap();
            assert_eq!(r.auc_full, r.auc_hn);
            assert!(r.bound_holds && r.auc_hn_at_most_full);
            assert!(r.check().is_ok());
        }
    }

    #[test]
    fn hard_negative_selection() {
        let m = NegativeMatrix::new(2, 3, vec![5.0, 1.0, 3.0, 0.5, 4.0, 2.0]).unwrap();
        assert_eq!(m.hard_negatives(Strategy::Hn1, 0, 0), vec![1.0, 0.5]);
        assert_eq!(m.hard_negatives(Strategy::Hn2, 2, 3), vec![0.5, 1.0, 2.0]);
        assert_eq!(m.hard_negatives(Strategy::Hn2, 3, 6), vec![0.5, 1.0, 2.0, 3.0, 4.0, 5.0]);
    }
}
