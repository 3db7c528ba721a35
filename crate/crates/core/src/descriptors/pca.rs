use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{l2_normalize, Descriptor};
use crate::error::{Error, Result};

/// Default regularization added to every eigenvalue before whitening.
pub const DEFAULT_EPSILON: f64 = 1e-10;

/// Full-rank PCA whitening model. All `d` components are retained.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// Row-major `d × d`; row `i` is the `i`-th principal direction.
    components: Vec<f64>,
    /// Sorted descending, nonnegative.
    eigenvalues: Vec<f64>,
    epsilon: f64,
}

impl PcaModel {
    pub fn from_parts(mean: Vec<f64>, components: Vec<f64>, eigenvalues: Vec<f64>, epsilon: f64) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::Empty("PCA mean"));
        }
        if components.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, actual: components.len() });
        }
        if eigenvalues.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: eigenvalues.len() });
        }
        if mean.iter().chain(&components).chain(&eigenvalues).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("PCA model"));
        }
        if eigenvalues.iter().any(|&e| e < 0.0) || eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("PCA eigenvalues must be nonnegative and sorted descending".into()));
        }
        if !epsilon.is_finite() || epsilon < 0.0 {
            return Err(Error::InvalidArgument("PCA epsilon must be >= 0".into()));
        }
        Ok(Self { mean, components, eigenvalues, epsilon })
    }

    /// Zero mean, identity rotation, unit eigenvalues and `epsilon = 0`.
    pub fn identity(dim: usize) -> Self {
        let mut components = vec![0.0; dim * dim];
        for i in 0..dim {
            components[i * dim + i] = 1.0;
        }
        Self { mean: vec![0.0; dim], components, eigenvalues: vec![1.0; dim], epsilon: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.components[i * d..(i + 1) * d]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Whitening transform without the final normalization:
    /// `diag(1/sqrt(λ + ε)) · components · (v − mean)`.
    pub fn transform(&self, v: &[f32]) -> Result<Vec<f64>> {
        let d = self.dim();
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: v.len() });
        }
        let centered: Vec<f64> = v.iter().zip(&self.mean).map(|(&x, m)| x as f64 - m).collect();
        Ok((0..d)
            .map(|i| {
                let dot: f64 = self.component(i).iter().zip(&centered).map(|(c, x)| c * x).sum();
                dot / libm::sqrt(self.eigenvalues[i] + self.epsilon)
            })
            .collect())
    }
}

/// Trains a PCA whitening model on `training` without dimension reduction.
///
/// The covariance uses the population normalization (`1/n`). Negative
/// eigenvalues from round-off are floored at zero; `epsilon` keeps the
/// whitening finite on rank-deficient data.
pub fn pca_train(training: &[Descriptor], epsilon: f64) -> Result<PcaModel> {
    if training.len() < 2 {
        return Err(Error::InvalidArgument(alloc::format!(
            "PCA needs at least 2 training samples, got {}",
            training.len()
        )));
    }
    let d = training[0].dim();
    if d == 0 {
        return Err(Error::Empty("PCA training descriptor"));
    }
    for t in training {
        if t.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, actual: t.dim() });
        }
    }
    let n = training.len();
    let mut mean = vec![0.0f64; d];
    for t in training {
        for (m, &v) in mean.iter_mut().zip(t.values()) {
            *m += v as f64;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }

    let centered = DMatrix::<f64>::from_fn(n, d, |r, c| training[r].values()[c] as f64 - mean[c]);
    let mut cov = centered.tr_mul(&centered);
    cov /= n as f64;
    // enforce exact symmetry before the symmetric solver
    for i in 0..d {
        for j in (i + 1)..d {
            let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
            cov[(i, j)] = s;
            cov[(j, i)] = s;
        }
    }

    let eig = SymmetricEigen::try_new(cov, 1e-15, 0).ok_or(Error::Eigen)?;
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b))
    });

    let mut components = Vec::with_capacity(d * d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &k in &order {
        let col = eig.eigenvectors.column(k);
        // sign convention: largest-magnitude entry positive
        let pivot = col
            .iter()
            .copied()
            .enumerate()
            .fold((0usize, 0.0f64), |best, (i, v)| if libm::fabs(v) > libm::fabs(best.1) { (i, v) } else { best })
            .1;
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        components.extend(col.iter().map(|v| v * sign));
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
    }
    PcaModel::from_parts(mean, components, eigenvalues, epsilon)
}

/// Whitens `v` and L2-normalizes the result. A vector equal to the model mean
/// yields the zero sentinel.
pub fn pca_whiten(v: &Descriptor, pca: &PcaModel) -> Result<Descriptor> {
    Ok(l2_normalize(pca.transform(v.values())?))
}
