#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    (0..n).map(|_| rng.sample::<f32, _>(StandardNormal)).collect()
}

pub fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f32> {
    (0..n).map(|_| rng.random::<f32>()).collect()
}

pub fn ids(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i:06}")).collect()
}

/// Euclidean distance accumulated in f64.
pub fn naive_l2(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// All distances of `query` to `rows`, sorted by (distance, row).
pub fn naive_scan(rows: &[f32], dim: usize, query: &[f32]) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = rows.chunks_exact(dim).enumerate().map(|(i, r)| (naive_l2(r, query), i)).collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all
}

/// Double-loop Mann–Whitney AUC (smaller distance = more positive, ties ½).
pub fn double_loop_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0f64;
    for &p in pos {
        for &n in neg {
            if p < n {
                s += 1.0;
            } else if p == n {
                s += 0.5;
            }
        }
    }
    s / (pos.len() as f64 * neg.len() as f64)
}

/// Channel sums of an H×W×C map by explicit triple loop.
pub fn spoc_oracle(data: &[f32], h: usize, w: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; c];
    for y in 0..h {
        for x in 0..w {
            for (ch, o) in out.iter_mut().enumerate() {
                *o += data[(y * w + x) * c + ch] as f64;
            }
        }
    }
    out
}

/// R-MAC regions `(x, y, side)` for an 8×8 map at two scales, worked out by
/// hand: one full-map region, then a 2×2 grid of side ⌊16/3⌋ = 5 starting at
/// 0 and 3.
pub const RMAC_8X8_L2: [(usize, usize, usize); 5] = [(0, 0, 8), (0, 0, 5), (3, 0, 5), (0, 3, 5), (3, 3, 5)];

/// Same for a 7-high, 10-wide map: one extra region along the width at both
/// scales (overlap 4/7 is closest to 0.4 among the candidates).
pub const RMAC_7X10_L2: [(usize, usize, usize); 8] =
    [(0, 0, 7), (3, 0, 7), (0, 0, 4), (3, 0, 4), (6, 0, 4), (0, 3, 4), (3, 3, 4), (6, 3, 4)];

/// Whitening by explicit matrix–vector product, then L2 normalization.
pub fn whiten_oracle(v: &[f64], mean: &[f64], comps: &[f64], eig: &[f64], eps: f64) -> Vec<f64> {
    let d = v.len();
    let mut out = vec![0.0; d];
    for i in 0..d {
        let mut s = 0.0;
        for j in 0..d {
            s += comps[i * d + j] * (v[j] - mean[j]);
        }
        out[i] = s / (eig[i] + eps).sqrt();
    }
    normalize(out)
}

pub fn normalize(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n == 0.0 {
        v
    } else {
        v.into_iter().map(|x| x / n).collect()
    }
}

/// R-MAC by enumerating the given regions with an explicit max-pool loop.
#[allow(clippy::too_many_arguments)]
pub fn rmac_oracle(
    data: &[f32],
    w: usize,
    c: usize,
    regions: &[(usize, usize, usize)],
    mean: &[f64],
    comps: &[f64],
    eig: &[f64],
    eps: f64,
) -> Vec<f64> {
    let mut acc = vec![0.0; c];
    for &(rx, ry, side) in regions {
        let mut pooled = vec![f64::NEG_INFINITY; c];
        for y in ry..ry + side {
            for x in rx..rx + side {
                for ch in 0..c {
                    pooled[ch] = pooled[ch].max(data[(y * w + x) * c + ch] as f64);
                }
            }
        }
        for (a, v) in acc.iter_mut().zip(whiten_oracle(&pooled, mean, comps, eig, eps)) {
            *a += v;
        }
    }
    normalize(acc)
}

/// `n` samples in `d` dimensions with a random linear mixing so that the
/// covariance is full-rank and far from diagonal.
pub fn correlated_samples(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f32>> {
    let mix: Vec<f64> = gaussian(rng, d * d).into_iter().map(|v| v as f64).collect();
    (0..n)
        .map(|_| {
            let z = gaussian(rng, d);
            (0..d)
                .map(|i| {
                    let s: f64 = (0..d).map(|j| mix[i * d + j] * z[j] as f64).sum();
                    (s + i as f64) as f32
                })
                .collect()
        })
        .collect()
}

/// Largest absolute deviation of the population covariance of `rows` from
/// the identity.
pub fn covariance_identity_error(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let c = rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / n;
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((c - target).abs());
        }
    }
    worst
}

/// Block means of one `side × side` response map on an `n × n` grid with
/// edges at `⌊i·side/n⌋`.
pub fn block_means(resp: &[f64], side: usize, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for by in 0..n {
        for bx in 0..n {
            let (y0, y1) = (by * side / n, (by + 1) * side / n);
            let (x0, x1) = (bx * side / n, (bx + 1) * side / n);
            let mut s = 0.0;
            for y in y0..y1 {
                for x in x0..x1 {
                    s += resp[y * side + x];
                }
            }
            out.push(s / ((y1 - y0) * (x1 - x0)) as f64);
        }
    }
    out
}

/// Hard negative selection straight from a `K × M` distance matrix:
/// the `knn` nearest per row, pooled and cut to the `total` smallest.
/// Entries are `(distance, query, pool)`.
pub fn oracle_hn2(matrix: &[Vec<f64>], knn: usize, total: usize) -> Vec<(f64, usize, usize)> {
    let mut cands = Vec::new();
    for (q, row) in matrix.iter().enumerate() {
        let mut r: Vec<(f64, usize, usize)> = row.iter().enumerate().map(|(m, &d)| (d, q, m)).collect();
        r.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        cands.extend_from_slice(&r[..knn.min(r.len())]);
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    cands.truncate(total);
    cands
}
